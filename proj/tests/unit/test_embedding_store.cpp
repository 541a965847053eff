#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>
#include <streambuf>

#include "aligner/embedding_store.hpp"
#include "aligner/error.hpp"
#include "random_data.hpp"

using namespace aligner;

namespace {

// Counts bytes and throws them away.
class CountingBuf : public std::streambuf {
public:
    std::uint64_t count = 0;

protected:
    int_type overflow(int_type c) override {
        if (c != traits_type::eof()) ++count;
        return traits_type::not_eof(c);
    }
    std::streamsize xsputn(const char*, std::streamsize n) override {
        count += static_cast<std::uint64_t>(n);
        return n;
    }
};

std::string bytes_of(const TokenEmbeddingSet& set) {
    std::ostringstream out(std::ios::binary);
    write_embedding_set(set, out);
    return out.str();
}

TokenEmbeddingSet read_bytes(const std::string& bytes, ReadOptions options = {}) {
    std::istringstream in(bytes, std::ios::binary);
    return read_embedding_set(in, options);
}

void check_format_error(const std::string& bytes, const std::string& message) {
    try {
        read_bytes(bytes);
        FAIL("expected a format error: " << message);
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()) == message);
    }
}

} // namespace

TEST_CASE("empty set writes only the header") {
    TokenEmbeddingSet set(4, "en", "test");
    const auto bytes = bytes_of(set);
    CHECK(bytes.size() == 19);
    CHECK(bytes.substr(0, 4) == "TEMB");
    const auto back = read_bytes(bytes);
    CHECK(back.dim() == 4);
    CHECK(back.size() == 0);
}

TEST_CASE("header fields are little-endian at fixed offsets") {
    TokenEmbeddingSet set(3);
    TokenMatrix m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    set.add({"ab", m});
    const auto b = bytes_of(set);
    const auto u = [&](std::size_t i) { return static_cast<unsigned>(static_cast<unsigned char>(b[i])); };
    CHECK(u(4) == 1); // version
    CHECK(u(5) == 0);
    CHECK(u(6) == 1); // dtype f32
    CHECK(u(7) == 3); // dim
    CHECK(u(11) == 1); // count
    CHECK(u(19) == 2); // id length
    CHECK(b.substr(21, 2) == "ab");
    CHECK(u(23) == 2); // tokens
    // 1.0f = 0x3f800000 little-endian
    CHECK(u(27) == 0x00);
    CHECK(u(30) == 0x3f);
    CHECK(b.size() == 19 + 2 + 2 + 4 + 6 * 4);
}

TEST_CASE("one sentence round-trips exactly") {
    TokenEmbeddingSet set(2);
    TokenMatrix m(2, 2);
    m << 1, 0, 0, 1;
    set.add({"only", m});
    CHECK(read_bytes(bytes_of(set)) == set);
}

TEST_CASE("random sets round-trip exactly") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t dim = 1 + rng() % 9;
        const std::size_t count = rng() % 12;
        auto set = testdata::to_set(testdata::random_sentences(rng, count, dim, 1, 20, "id"), dim);
        const auto back = read_bytes(bytes_of(set));
        REQUIRE(back == set);
        // Bitwise, not just ==: -0.0 and payloads survive.
        for (std::size_t i = 0; i < set.size(); ++i) {
            CHECK(std::memcmp(back[i].matrix.data(), set[i].matrix.data(),
                              sizeof(float) * static_cast<std::size_t>(set[i].matrix.size())) == 0);
        }
    }
}

TEST_CASE("byte count of a 1000 x 100 x 768 set matches the format arithmetic") {
    TokenEmbeddingSet set(768);
    std::uint64_t expected = 4 + 2 + 1 + 4 + 8;
    for (int i = 0; i < 1000; ++i) {
        const std::string id = "sent-" + std::to_string(i);
        set.add({id, TokenMatrix::Constant(100, 768, 0.25f)});
        expected += 2 + id.size() + 4 + 4ull * 100 * 768;
    }
    CountingBuf buf;
    std::ostream sink(&buf);
    const auto written = write_embedding_set(set, sink);
    CHECK(written == expected);
    CHECK(buf.count == expected);
    CHECK(expected > 307'000'000);
}

TEST_CASE("reader rejects malformed input") {
    std::mt19937_64 rng(3);
    auto set = testdata::to_set(testdata::random_sentences(rng, 3, 4, 2, 2, "r"), 4);
    const auto good = bytes_of(set);

    SUBCASE("bad magic") {
        auto b = good;
        b[0] = 'X';
        check_format_error(b, "bad magic");
    }
    SUBCASE("version") {
        auto b = good;
        b[4] = 2;
        check_format_error(b, "unsupported version 2");
    }
    SUBCASE("dtype") {
        auto b = good;
        b[6] = 2;
        check_format_error(b, "unsupported dtype 2");
    }
    SUBCASE("truncated header") { check_format_error(good.substr(0, 10), "truncated header"); }
    SUBCASE("truncated inside each record") {
        // Record r starts after the header and r full records of id "r<k>",
        // 2 tokens of dim 4.
        const std::size_t record = 2 + 2 + 4 + 2 * 4 * 4;
        for (std::size_t r = 0; r < 3; ++r) {
            const std::size_t start = 19 + r * record;
            for (std::size_t cut : {start + 1, start + 5, start + record - 1}) {
                check_format_error(good.substr(0, cut), "truncated record " + std::to_string(r));
            }
        }
    }
    SUBCASE("non-finite value") {
        auto b = good;
        const float nan = std::numeric_limits<float>::quiet_NaN();
        // First value of record 1.
        const std::size_t offset = 19 + (2 + 2 + 4 + 32) + 2 + 2 + 4;
        std::memcpy(&b[offset], &nan, 4);
        check_format_error(b, "non-finite value in record 1");
    }
}

TEST_CASE("over-long sentences are truncated on read") {
    TokenEmbeddingSet set(2);
    TokenMatrix m(7, 2);
    for (int i = 0; i < 7; ++i) m.row(i) << float(i), float(-i);
    set.add({"long", m});
    std::ostringstream out(std::ios::binary);
    write_embedding_set(set, out, 10);
    const auto back = read_bytes(out.str(), ReadOptions{5});
    REQUIRE(back.size() == 1);
    CHECK(back[0].token_count() == 5);
    CHECK(back[0].matrix == m.topRows(5));
}

TEST_CASE("set invariants") {
    TokenEmbeddingSet set(3);
    set.add({"a", TokenMatrix::Ones(1, 3)});
    CHECK_THROWS_AS(set.add({"a", TokenMatrix::Ones(1, 3)}), DataError);
    CHECK_THROWS_AS(set.add({"b", TokenMatrix::Ones(1, 2)}), DataError);
    CHECK_THROWS_AS(set.add({"c", TokenMatrix(0, 3)}), DataError);
    TokenMatrix bad = TokenMatrix::Ones(1, 3);
    bad(0, 1) = std::numeric_limits<float>::infinity();
    CHECK_THROWS_AS(set.add({"d", bad}), DataError);
    CHECK(set.find("a") == 0);
    CHECK_FALSE(set.find("zz"));

    // Writer refuses sets over the length cap before emitting anything.
    TokenEmbeddingSet big(1);
    big.add({"x", TokenMatrix::Ones(101, 1)});
    std::ostringstream out;
    CHECK_THROWS_AS(write_embedding_set(big, out), DataError);
    CHECK(out.str().empty());
}

TEST_CASE("files carry the language in a sidecar") {
    const auto dir = std::filesystem::temp_directory_path() / "aligner_store_test";
    std::filesystem::create_directories(dir);
    TokenEmbeddingSet set(2, "de", "synthetic");
    set.add({"x", TokenMatrix::Ones(2, 2)});
    const auto path = dir / "de.temb";
    save_embedding_set(set, path);
    CHECK(std::filesystem::exists(sidecar_path(path)));
    const auto back = load_embedding_set(path);
    CHECK(back == set);
    CHECK(back.language() == "de");

    std::istringstream side("{\"id\":\"a\",\"lang\":\"en\",\"text\":\"hi\"}\n{\"id\":\"b\",\"lang\":\"en\"}\n");
    const auto records = read_sidecar(side);
    REQUIRE(records.size() == 2);
    CHECK(records[0].text == "hi");
    CHECK_FALSE(records[1].text);
    std::filesystem::remove_all(dir);
}
