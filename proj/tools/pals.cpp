// Command-line front end: phantom, forward, reconstruct and check.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "pals/pals.hpp"
#include "pals/selfcheck.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { Ok = 0, CheckFailed = 1, BadConfig = 2, SolverFailed = 3, MaxIters = 4, Stagnated = 5 };

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    int threads = 0;
};

pals::ExperimentConfig load(const Options& o) {
    pals::ExperimentConfig c = pals::load_config(o.config);
    if (o.seed) c.seed = *o.seed;
    if (o.out) c.output.directory = *o.out;
    return c;
}

int exit_code(pals::StopReason r) {
    switch (r) {
    case pals::StopReason::Discrepancy: return Ok;
    case pals::StopReason::MaxIters: return MaxIters;
    case pals::StopReason::Stagnation: return Stagnated;
    }
    return SolverFailed;
}

int cmd_phantom(const Options& o) {
    const auto c = load(o);
    pals::Experiment e(c);
    const fs::path dir = c.output.directory;
    pals::write_phantom_outputs(dir, e.grid(), e.phantom());
    std::cout << "wrote " << (dir / "truth.csv").string() << " and " << (dir / "truth.pgm").string() << '\n';
    return Ok;
}

int cmd_forward(const Options& o) {
    const auto c = load(o);
    pals::Experiment e(c);
    const fs::path dir = c.output.directory;
    const auto r = e.synthesize();
    pals::write_phantom_outputs(dir, e.grid(), r.phantom);
    pals::write_data_outputs(dir, c, r);
    std::cout << "data_size=" << r.clean.size() << " noise_norm=" << r.noise_norm << " (" << (dir / "noise.txt").string()
              << ")\n";
    return Ok;
}

int cmd_reconstruct(const Options& o) {
    const auto c = load(o);
    pals::Experiment e(c);
    const fs::path dir = c.output.directory;
    const auto observer = [&](const pals::SolverState& s) {
        const auto& rec = s.log.back();
        std::printf("iter %4d  cost %.6e  lambda %.3e  active %d\n", rec.iteration, rec.cost, rec.lambda,
                    rec.active_bumps);
        std::fflush(stdout);
        if (c.output.snapshots) pals::io::write_params_csv(dir / "snapshots" / pals::snapshot_name(rec.iteration), s.model);
    };
    const auto r = e.reconstruct(observer);
    pals::write_reconstruction_outputs(dir, c, e.grid(), r);
    std::cout << "stop_reason=" << pals::to_string(*r.state.stop_reason) << " iterations=" << r.state.iteration
              << " jaccard=" << r.metrics.jaccard << " (" << (dir / "metrics.txt").string() << ")\n";
    return exit_code(*r.state.stop_reason);
}

/// Gradient, Jacobian and adjoint self-tests on the configured model at the
/// phantom truth and at the initial level set.
int cmd_check(const Options& o) {
    const auto c = load(o);
    pals::Experiment e(c);
    const fs::path dir = c.output.directory;
    const auto r = e.synthesize();
    std::mt19937_64 rng(c.seed);
    pals::io::KeyValues kv;
    bool ok = true;

    std::visit(
        [&](const auto& fwd) {
            using Scalar = typename std::decay_t<decltype(*fwd)>::Scalar;
            const double adj = pals::selfcheck::adjoint_mismatch<Scalar>(*fwd, r.phantom.truth, rng);
            const Eigen::VectorXd v = pals::selfcheck::random_vector<double>(r.phantom.truth.size(), rng);
            const double jac = pals::selfcheck::jacobian_fd_error<Scalar>(*fwd, r.phantom.truth, v);

            const pals::PalsModel m = pals::init_pals(c.init, e.grid(), rng);
            pals::VectorX<Scalar> data;
            if constexpr (pals::is_complex_v<Scalar>)
                data = r.noisy;
            else
                data = r.noisy.real();
            pals::PalsProblem<Scalar> prob(*fwd, data);
            const auto params = pals::parameter_layout(m.bump_count(), true);
            const double grad = pals::selfcheck::gradient_fd_error<Scalar>(prob, m, params);

            kv.set("adjoint_mismatch", adj);
            kv.set("jacobian_fd_error", jac);
            kv.set("gradient_fd_error", grad);
            ok = adj < 1e-10 && jac < 1e-3 && grad < 1e-4;
        },
        e.model());
    kv.set("result", ok ? "pass" : "fail");
    kv.write(dir / "check.txt");
    for (const auto& [k, v] : kv.items()) std::cout << k << '=' << v << '\n';
    return ok ? Ok : CheckFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parametric level set reconstruction for CT, ERT and DOT"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", opt.config, "TOML experiment file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", opt.seed, "override the config seed");
        sub->add_option("--out", opt.out, "override the output directory");
        sub->add_option("--threads", opt.threads, "cap on worker threads (0 = library default)")
            ->check(CLI::NonNegativeNumber);
    };
    auto* phantom = app.add_subcommand("phantom", "rasterize the truth and write truth.csv/truth.pgm");
    auto* forward = app.add_subcommand("forward", "write clean and noisy data and the noise norm");
    auto* reconstruct = app.add_subcommand("reconstruct", "run the level set evolution and write all outputs");
    auto* check = app.add_subcommand("check", "gradient, Jacobian and adjoint self-tests");
    for (auto* s : {phantom, forward, reconstruct, check}) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? Ok : BadConfig;
    }
    if (opt.threads > 0) Eigen::setNbThreads(opt.threads);

    try {
        if (*phantom) return cmd_phantom(opt);
        if (*forward) return cmd_forward(opt);
        if (*reconstruct) return cmd_reconstruct(opt);
        if (*check) return cmd_check(opt);
    } catch (const pals::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return BadConfig;
    } catch (const pals::SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return SolverFailed;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return BadConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return SolverFailed;
    }
    return Ok;
}
