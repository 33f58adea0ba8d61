#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace winmart {

enum class GridMode { Uniform, Geometric };

GridMode parse_grid_mode(const std::string& name);
std::string to_string(GridMode mode);

/// Monotone time nodes on [start_time, 1 - epsilon_final].
///
/// Geometric grids keep the ratio (1 - t_{k+1}) / (1 - t_k) constant, so the
/// step relative to the remaining horizon is the same everywhere and the
/// singular endgame near t = 1 is resolved.
class TimeGrid {
public:
    TimeGrid() = default;

    double start_time() const { return nodes_.front(); }
    double epsilon_final() const { return epsilon_final_; }
    GridMode mode() const { return mode_; }
    std::size_t n_nodes() const { return nodes_.size(); }
    std::size_t n_steps() const { return nodes_.size() - 1; }
    double operator[](std::size_t k) const { return nodes_[k]; }
    double last() const { return nodes_.back(); }
    double dt(std::size_t k) const { return nodes_[k + 1] - nodes_[k]; }
    std::span<const double> nodes() const { return nodes_; }

    // Index of the node nearest to t.
    std::size_t nearest_node(double t) const;

    // Short label used in reports, e.g. "geometric:4096:eps=9.5367431640625e-07".
    std::string id() const;

    friend TimeGrid make_grid(double, std::size_t, GridMode, double);

private:
    std::vector<double> nodes_;
    GridMode mode_ = GridMode::Uniform;
    double epsilon_final_ = 0.0;
};

TimeGrid make_grid(double start_time, std::size_t n_steps, GridMode mode, double epsilon_final);

inline constexpr double kDefaultEpsilonFinal = 0x1p-20;

} // namespace winmart
