#include <aligner/synthetic.hpp>
#include <aligner/retrieval.hpp>

#include <iostream>

int main() {
    auto spec = aligner::default_synthetic_spec();
    spec.num_pairs = 16;
    const auto data = aligner::generate_synthetic_pair(spec);
    const auto r = aligner::evaluate_retrieval({data.src, data.tgt, data.gold, "xx-yy"}, {});
    std::cout << "accuracy " << r.accuracy << '\n';
    return r.accuracy > 0.9 ? 0 : 1;
}
