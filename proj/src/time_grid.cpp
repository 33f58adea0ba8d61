#include "winmart/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "winmart/error.hpp"

namespace winmart {

GridMode parse_grid_mode(const std::string& name) {
    if (name == "uniform") return GridMode::Uniform;
    if (name == "geometric") return GridMode::Geometric;
    throw ParameterError("unknown grid mode '" + name + "' (expected uniform|geometric)");
}

std::string to_string(GridMode mode) {
    return mode == GridMode::Uniform ? "uniform" : "geometric";
}

TimeGrid make_grid(double start_time, std::size_t n_steps, GridMode mode, double epsilon_final) {
    if (!(epsilon_final > 0.0) || !(start_time >= 0.0) || !(start_time < 1.0 - epsilon_final))
        throw ParameterError("make_grid: need 0 <= start_time < 1 - epsilon_final, epsilon_final > 0");
    if (n_steps < 1) throw ParameterError("make_grid: n_steps must be >= 1");

    TimeGrid g;
    g.mode_ = mode;
    g.epsilon_final_ = epsilon_final;
    g.nodes_.resize(n_steps + 1);
    const double end = 1.0 - epsilon_final;
    const double n = static_cast<double>(n_steps);
    if (mode == GridMode::Uniform) {
        const double span = end - start_time;
        for (std::size_t k = 0; k <= n_steps; ++k)
            g.nodes_[k] = start_time + span * (static_cast<double>(k) / n);
    } else {
        const double horizon = 1.0 - start_time;
        const double log_ratio = std::log(epsilon_final / horizon);
        for (std::size_t k = 0; k <= n_steps; ++k)
            g.nodes_[k] = 1.0 - horizon * std::exp(log_ratio * (static_cast<double>(k) / n));
    }
    g.nodes_.front() = start_time;
    g.nodes_.back() = end;
    for (std::size_t k = 0; k < n_steps; ++k) {
        if (!(g.nodes_[k + 1] > g.nodes_[k]))
            throw ParameterError("make_grid: too many steps for the requested range (nodes collide)");
    }
    return g;
}

std::size_t TimeGrid::nearest_node(double t) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t);
    if (it == nodes_.end()) return nodes_.size() - 1;
    std::size_t k = static_cast<std::size_t>(it - nodes_.begin());
    if (k > 0 && std::abs(nodes_[k - 1] - t) <= std::abs(nodes_[k] - t)) --k;
    return k;
}

std::string TimeGrid::id() const {
    std::ostringstream os;
    os.precision(17);
    os << to_string(mode_) << ':' << n_steps() << ":t0=" << start_time() << ":eps=" << epsilon_final_;
    return os.str();
}

} // namespace winmart
