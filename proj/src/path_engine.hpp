#pragma once

// Block-parallel path stepping shared by every simulated model. Paths are
// processed in fixed blocks; each path draws its increments from its own
// counter-based stream and writes only its own output slots, so the result
// is independent of the worker count and of block scheduling.

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "winmart/diffusion.hpp"
#include "winmart/error.hpp"
#include "winmart/rng.hpp"
#include "winmart/simd/kernels.hpp"

namespace winmart::detail {

inline constexpr std::size_t kPathBlock = 256;

// Model concept (one instance per block, created by the factory):
//   void step(std::size_t k, std::span<double> state, std::span<const double> z,
//             std::span<double> entropy, bool accumulate);
//   void observe(std::size_t node, std::span<const double> state, std::span<double> out);
// `state0` is the initial model state (the start value itself, or a latent
// driver such as a Brownian level).
template <class ModelFactory>
RunResult run_paths(std::string model_id, const TimeGrid& grid, double x0, double state0, std::size_t n_paths,
                    std::uint64_t seed, const RunRequest& request, unsigned threads, ModelFactory&& factory) {
    if (n_paths < 1) throw ParameterError("n_paths must be >= 1");
    const std::size_t n_nodes = grid.n_nodes();
    for (std::size_t node : request.sample_nodes)
        if (node >= n_nodes) throw ParameterError("sample node index outside the grid");

    RunResult r;
    r.model_id = std::move(model_id);
    r.grid = grid;
    r.x0 = x0;
    r.seed = seed;
    r.n_paths = n_paths;
    r.sample_nodes = request.sample_nodes;
    if (request.keep_paths) r.paths = PathMatrix(n_paths, n_nodes);
    r.samples = PathMatrix(n_paths, request.sample_nodes.size());
    r.sample_entropy = PathMatrix(n_paths, request.sample_nodes.size());
    r.entropy.assign(n_paths, 0.0);
    r.last_value.assign(n_paths, 0.0);
    if (request.complete_terminal) r.terminal.assign(n_paths, 0);

    std::vector<std::vector<std::size_t>> slots_at(n_nodes);
    for (std::size_t s = 0; s < request.sample_nodes.size(); ++s) slots_at[request.sample_nodes[s]].push_back(s);

    const simd::KernelTable& kernels = simd::active_kernels();
    const std::size_t n_blocks = (n_paths + kPathBlock - 1) / kPathBlock;
    std::atomic<std::size_t> next_block{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        std::vector<double> state(kPathBlock), obs(kPathBlock), z_even(kPathBlock), z_odd(kPathBlock),
            entropy(kPathBlock), u(kPathBlock);
        try {
            for (std::size_t b = next_block++; b < n_blocks; b = next_block++) {
                const std::size_t first = b * kPathBlock;
                const std::size_t n = std::min(kPathBlock, n_paths - first);
                auto model = factory();
                std::span<double> st(state.data(), n), ob(obs.data(), n), ent(entropy.data(), n);
                std::fill(st.begin(), st.end(), state0);
                std::fill(ent.begin(), ent.end(), 0.0);

                auto record = [&](std::size_t node) {
                    model.observe(node, st, ob);
                    if (request.keep_paths)
                        for (std::size_t i = 0; i < n; ++i) r.paths(first + i, node) = ob[i];
                    for (std::size_t s : slots_at[node])
                        for (std::size_t i = 0; i < n; ++i) {
                            r.samples(first + i, s) = ob[i];
                            r.sample_entropy(first + i, s) = ent[i];
                        }
                };

                record(0);
                for (std::size_t k = 0; k + 1 < n_nodes; ++k) {
                    if (k % 2 == 0) kernels.normal_pair(seed, k / 2, first, n, z_even.data(), z_odd.data());
                    const double* z = (k % 2 == 0) ? z_even.data() : z_odd.data();
                    model.step(k, st, std::span<const double>(z, n), ent, request.entropy);
                    record(k + 1);
                }
                for (std::size_t i = 0; i < n; ++i) {
                    r.last_value[first + i] = ob[i];
                    r.entropy[first + i] = ent[i];
                }
                if (request.complete_terminal) {
                    kernels.uniform(seed, static_cast<std::uint32_t>(RngStream::Terminal), 0, first, n, u.data());
                    for (std::size_t i = 0; i < n; ++i) r.terminal[first + i] = u[i] < ob[i] ? 1 : 0;
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next_block = n_blocks;
        }
    };

    if (threads == 0) threads = default_thread_count();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_blocks));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return r;
}

} // namespace winmart::detail
