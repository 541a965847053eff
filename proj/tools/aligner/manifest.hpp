#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace aligner::cli {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Digest of a file, or of every regular file under a directory (keys are the
// file paths, sorted).
std::map<std::string, std::string> digest_path(const std::filesystem::path& path);

} // namespace aligner::cli
