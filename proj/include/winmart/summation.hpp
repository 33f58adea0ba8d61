#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace winmart {

// Pairwise summation with a fixed split order. The result depends only on
// the input sequence, never on how the caller scheduled the work that
// produced it.
inline double pairwise_sum(std::span<const double> v) {
    constexpr std::size_t kLeaf = 32;
    if (v.size() <= kLeaf) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

struct SampleMoments {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0; // unbiased
    double std_error() const { return n > 1 ? std::sqrt(variance / static_cast<double>(n)) : 0.0; }
};

// Two-pass mean/variance, both passes pairwise.
SampleMoments sample_moments(std::span<const double> v);

} // namespace winmart
