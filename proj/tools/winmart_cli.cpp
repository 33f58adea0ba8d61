// winmart: simulation runs, entropy reports, certificates and discrete
// martingale transport solves from the command line.
//
// Exit codes: 0 success, 1 numerical failure or failed certificate,
// 2 usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "winmart/diffusion.hpp"
#include "winmart/discrete_mot.hpp"
#include "winmart/entropy.hpp"
#include "winmart/error.hpp"
#include "winmart/martingales.hpp"
#include "winmart/simd/kernels.hpp"
#include "winmart/study.hpp"
#include "winmart/value.hpp"

using nlohmann::json;
using namespace winmart;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Options {
    std::string spec = "aldous";
    double x0 = 0.5;
    std::size_t paths = 100000;
    std::size_t steps = 4096;
    double eps = kDefaultEpsilonFinal;
    std::optional<std::uint64_t> seed;
    std::string grid = "geometric";
    std::string format = "json";
    std::string out;
    std::string terminal_out;
    // value
    std::optional<double> s;
    // check
    std::string suite = "all";
    // discrete
    std::string problem;
    std::size_t T = 8;
    double width = 0.05;
    std::size_t max_iters = 5000;
    double tol = 1e-8;
    double min_prob = 0.0;
    // compare
    std::size_t bass_paths = 20000;
    std::string figure_dir;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Writes to --out when given, stdout otherwise.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw UsageError("cannot open output file '" + path + "'");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::uint64_t require_seed(const Options& o) {
    if (!o.seed) throw UsageError("--seed is required for stochastic commands");
    return *o.seed;
}

void check_x0(double x0) {
    if (!(x0 > 0.0 && x0 < 1.0)) throw UsageError("--x0 must lie in (0, 1)");
}

void check_format(const Options& o) {
    if (o.format != "csv" && o.format != "json") throw UsageError("--format must be csv or json");
}

RunSettings settings_from(const Options& o) {
    check_x0(o.x0);
    if (o.paths < 1) throw UsageError("--paths must be >= 1");
    RunSettings s;
    s.model_id = o.spec;
    s.x0 = o.x0;
    s.n_paths = o.paths;
    s.n_steps = o.steps;
    s.epsilon_final = o.eps;
    s.grid_mode = parse_grid_mode(o.grid);
    s.seed = require_seed(o);
    return s;
}

json run_config(const std::string& command, const RunSettings& s) {
    return {{"command", command},
            {"spec", s.model_id},
            {"x0", s.x0},
            {"n_paths", s.n_paths},
            {"n_steps", s.n_steps},
            {"epsilon_final", s.epsilon_final},
            {"grid", to_string(s.grid_mode)},
            {"seed", s.seed}};
}

json envelope(json config, json results) {
    return {{"version", kVersion}, {"config", std::move(config)}, {"results", std::move(results)}};
}

json entropy_json(const EntropyEstimate& e) {
    return {{"spec_id", e.spec_id},
            {"x0", e.x0},
            {"n_paths", e.n_paths},
            {"n_steps", e.n_steps},
            {"seed", e.seed},
            {"mean", e.mean},
            {"std_error", e.std_error},
            {"bracket", {e.truncation_bracket.first, e.truncation_bracket.second}},
            {"tail_rule", to_string(e.tail_rule)},
            {"corrected_mean", e.corrected_mean},
            {"corrected_std_error", e.corrected_std_error},
            {"grid_id", e.grid_id}};
}

void print_json(std::ostream& os, const json& j) { os << j.dump(2) << '\n'; }

// CSV has no room for metadata, so a CSV written to a file gets the
// run config beside it as <out>.json.
void write_sidecar(const std::string& out, const json& config) {
    if (out.empty()) return;
    Sink side(out + ".json");
    print_json(side.stream(), {{"version", kVersion}, {"config", config}});
}

int cmd_simulate(const Options& o) {
    check_format(o);
    const RunSettings s = settings_from(o);
    const PathEnsemble e = simulate_model(s.model_id, s.grid(), s.x0, s.n_paths, s.seed);
    Sink sink(o.out);
    if (o.format == "csv") {
        write_paths_csv(sink.stream(), e);
        if (!o.terminal_out.empty()) {
            Sink term(o.terminal_out);
            write_terminal_csv(term.stream(), e);
        }
        write_sidecar(o.out, run_config("simulate", s));
    } else {
        json paths = json::array();
        for (std::size_t p = 0; p < e.n_paths(); ++p) {
            auto row = e.values.row(p);
            paths.push_back(std::vector<double>(row.begin(), row.end()));
        }
        auto nodes = e.grid.nodes();
        print_json(sink.stream(), envelope(run_config("simulate", s),
                                           {{"t", std::vector<double>(nodes.begin(), nodes.end())},
                                            {"paths", paths},
                                            {"terminal", e.terminal}}));
    }
    return 0;
}

int cmd_entropy(const Options& o) {
    check_format(o);
    const RunSettings s = settings_from(o);
    const EntropyEstimate e = run_entropy(s);
    Sink sink(o.out);
    if (o.format == "csv") {
        sink.stream().precision(17);
        sink.stream() << "spec_id,x0,n_paths,n_steps,seed,mean,std_error,bracket_lo,bracket_hi,corrected_mean,"
                         "corrected_std_error\n"
                      << e.spec_id << ',' << e.x0 << ',' << e.n_paths << ',' << e.n_steps << ',' << e.seed << ','
                      << e.mean << ',' << e.std_error << ',' << e.truncation_bracket.first << ','
                      << e.truncation_bracket.second << ',' << e.corrected_mean << ',' << e.corrected_std_error
                      << '\n';
        write_sidecar(o.out, run_config("entropy", s));
    } else {
        print_json(sink.stream(), envelope(run_config("entropy", s), entropy_json(e)));
    }
    return 0;
}

int cmd_value(const Options& o) {
    check_x0(o.x0);
    const double s = o.s.value_or(0.0);
    const double v = v_bar(s, o.x0);
    if (o.format == "json") {
        print_json(std::cout, envelope({{"command", "value"}, {"x0", o.x0}, {"s", s}},
                                       {{"v_bar", v}, {"v_tilde", v_tilde(s, o.x0)}}));
    } else {
        std::printf("%.7f\n", v);
    }
    return 0;
}

int cmd_check(const Options& o) {
    const auto certs = run_certificates(o.suite);
    json results = json::array();
    bool ok = true;
    for (const auto& c : certs) {
        ok = ok && c.passed;
        results.push_back({{"check_name", c.check_name},
                           {"points_tested", c.points_tested},
                           {"max_residual", c.max_residual},
                           {"tolerance", c.tolerance},
                           {"verdict", c.passed ? "pass" : "fail"},
                           {"detail", c.detail}});
    }
    Sink sink(o.out);
    print_json(sink.stream(), envelope({{"command", "check"}, {"suite", o.suite}}, results));
    return ok ? 0 : 1;
}

int cmd_discrete(const Options& o) {
    DiscreteMartingaleProblem p = o.problem.empty() ? make_win_problem(o.T, o.width) : load_problem_json_file(o.problem);
    const MartingaleCoupling c = solve_entropic_mot(p, o.max_iters, o.tol);
    json config = {{"command", "discrete"}, {"max_iters", o.max_iters}, {"tol", o.tol}};
    if (o.problem.empty()) {
        config["T"] = o.T;
        config["width"] = o.width;
    } else {
        config["problem"] = o.problem;
    }
    json summary = {{"n_states", p.n_states()},
                    {"T", p.n_steps},
                    {"ref_var", p.ref_var},
                    {"sweeps", c.sweeps},
                    {"converged", c.converged},
                    {"terminal_tv", c.terminal_tv},
                    {"martingale_residual", c.martingale_residual},
                    {"initial_kl", c.initial_kl},
                    {"transition_kl", c.transition_kl},
                    {"normalized_kl", c.normalized_kl()},
                    {"objective_trace", c.objective_trace},
                    {"dual_trace", c.dual_trace}};
    if (!o.out.empty()) {
        Sink sink(o.out);
        write_kernels_csv(sink.stream(), c, p.states, o.min_prob);
    }
    print_json(std::cout, envelope(config, summary));
    return c.converged ? 0 : 1;
}

int cmd_compare(const Options& o) {
    RunSettings base = settings_from(o);
    json rows = json::array();
    for (const std::string id : {"aldous", "aldous-tc:sq", "aldous-tc:sine", "bass"}) {
        RunSettings s = base;
        s.model_id = id;
        if (id == "bass") s.n_paths = std::min(o.paths, o.bass_paths);
        const EntropyEstimate e = run_entropy(s);
        rows.push_back(entropy_json(e));
    }
    if (!o.figure_dir.empty()) {
        std::filesystem::create_directories(o.figure_dir);
        // Two sample paths per model, for plotting.
        for (const std::string id : {"aldous", "bass"}) {
            const PathEnsemble e = simulate_model(id, base.grid(), base.x0, 2, base.seed);
            std::string name = id;
            Sink sink(o.figure_dir + "/" + name + "_paths.csv");
            write_paths_csv(sink.stream(), e);
        }
    }
    json config = run_config("compare", base);
    config.erase("spec");
    config["bass_paths"] = std::min(o.paths, o.bass_paths);
    json results = {{"optimal_value", optimal_value(base.x0)},
                    {"lower_bound_v_tilde", v_tilde(0.0, base.x0)},
                    {"estimates", rows}};
    Sink sink(o.out);
    print_json(sink.stream(), envelope(config, results));
    return 0;
}

void add_run_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--spec", o.spec, "aldous | bass | aldous-tc:<sq|sine|id>")->capture_default_str();
    cmd->add_option("--x0", o.x0, "start value in (0,1)")->capture_default_str();
    cmd->add_option("--paths", o.paths, "number of paths")->capture_default_str();
    cmd->add_option("--steps", o.steps, "number of time steps")->capture_default_str();
    cmd->add_option("--eps", o.eps, "distance of the last node to t=1")->capture_default_str();
    cmd->add_option("--seed", o.seed, "64-bit seed (required)");
    cmd->add_option("--grid", o.grid, "uniform | geometric")->capture_default_str();
    cmd->add_option("--format", o.format, "csv | json")->capture_default_str();
    cmd->add_option("--out", o.out, "output file (default stdout)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entropy-optimal win-martingales: simulation, entropy estimates and certificates"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    Options o;

    auto* simulate = app.add_subcommand("simulate", "simulate paths; CSV path,t,value or JSON");
    add_run_options(simulate, o);
    simulate->add_option("--terminal-out", o.terminal_out, "CSV path,terminal for the completed outcomes");

    auto* entropy = app.add_subcommand("entropy", "Monte-Carlo specific relative entropy of a model");
    add_run_options(entropy, o);

    auto* value = app.add_subcommand("value", "closed-form value v_bar(s, x0)");
    value->add_option("--x0", o.x0, "start value in (0,1)")->capture_default_str();
    value->add_option("--s", o.s, "start time (default 0: the optimal value)");
    value->add_option("--format", o.format, "csv (plain number) | json")->capture_default_str();
    o.format = "json";

    auto* check = app.add_subcommand("check", "deterministic certificate suites");
    check->add_option("--suite", o.suite, "pde | feller | bounds | all")->capture_default_str();
    check->add_option("--out", o.out, "output file (default stdout)");

    auto* discrete = app.add_subcommand("discrete", "entropic discrete martingale transport");
    discrete->add_option("--problem", o.problem, "JSON {states, T, mu, nu, ref_var[, f0]}");
    discrete->add_option("--T", o.T, "steps of the built-in win-problem")->capture_default_str();
    discrete->add_option("--width", o.width, "mollification width of the built-in win-problem")->capture_default_str();
    discrete->add_option("--max-iters", o.max_iters, "maximum sweeps")->capture_default_str();
    discrete->add_option("--tol", o.tol, "feasibility tolerance")->capture_default_str();
    discrete->add_option("--min-prob", o.min_prob, "omit kernel entries at or below this")->capture_default_str();
    discrete->add_option("--out", o.out, "kernel CSV step,from,to,prob");

    auto* compare = app.add_subcommand("compare", "entropy of Aldous against competitors; figure data");
    add_run_options(compare, o);
    compare->add_option("--bass-paths", o.bass_paths, "path cap for the Bass run")->capture_default_str();
    compare->add_option("--figure-dir", o.figure_dir, "directory for two-path CSVs per model");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    // `value` prints a bare number unless --format json is given explicitly.
    if (value->parsed() && value->count("--format") == 0) o.format = "csv";

    try {
        if (simulate->parsed()) return cmd_simulate(o);
        if (entropy->parsed()) return cmd_entropy(o);
        if (value->parsed()) return cmd_value(o);
        if (check->parsed()) return cmd_check(o);
        if (discrete->parsed()) return cmd_discrete(o);
        if (compare->parsed()) return cmd_compare(o);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        const char* kind = dynamic_cast<const InfeasibleError*>(&e)       ? "infeasible"
                           : dynamic_cast<const DomainError*>(&e)         ? "domain"
                           : dynamic_cast<const InsufficientDataError*>(&e) ? "insufficient-data"
                                                                            : "numerical";
        const json diag = {{"version", kVersion},
                           {"error", {{"kind", kind}, {"message", e.what()}}},
                           {"kernels", simd::active_kernels().name}};
        std::cerr << diag.dump(2) << '\n';
        return 1;
    }
    return 2;
}
