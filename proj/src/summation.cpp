#include "winmart/summation.hpp"

#include <vector>

namespace winmart {

SampleMoments sample_moments(std::span<const double> v) {
    SampleMoments m;
    m.n = v.size();
    if (m.n == 0) return m;
    m.mean = pairwise_sum(v) / static_cast<double>(m.n);
    if (m.n < 2) return m;
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = v[i] - m.mean;
        sq[i] = d * d;
    }
    m.variance = pairwise_sum(sq) / static_cast<double>(m.n - 1);
    return m;
}

} // namespace winmart
