#pragma once

#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <variant>

#include "pals/config.hpp"
#include "pals/ct.hpp"
#include "pals/dot.hpp"
#include "pals/ert.hpp"
#include "pals/io.hpp"
#include "pals/level_set.hpp"
#include "pals/optim.hpp"
#include "pals/phantom.hpp"
#include "pals/synth.hpp"

namespace pals {

using AnyModel =
    std::variant<std::shared_ptr<const CtModel>, std::shared_ptr<const ErtModel>, std::shared_ptr<const DotModel>>;

inline AnyModel build_model(const ExperimentConfig& c) {
    switch (c.model) {
    case ModelKind::CT: {
        CtGeometry geom;
        geom.domain = c.ct.domain;
        geom.detectors = c.ct.detectors;
        geom.angles = CtGeometry::angle_range(c.ct.angle_min_deg, c.ct.angle_max_deg, c.ct.angle_step_deg);
        return std::make_shared<const CtModel>(Grid2D::uniform(c.ct.domain, c.ct.nx, c.ct.ny), std::move(geom));
    }
    case ModelKind::ERT: {
        ErtSetup s = ErtSetup::standard(c.ert.background);
        if (c.ert.sensors != 30) {
            s.sensors = perimeter_sensors(s.imaging, c.ert.sensors);
            s.dipoles = cross_medium_dipoles(c.ert.sensors);
        }
        return std::make_shared<const ErtModel>(std::move(s));
    }
    case ModelKind::DOT: {
        DotSetup s = DotSetup::standard();
        s.frequencies_hz = c.dot.frequencies_hz;
        s.reduced_scattering = c.dot.reduced_scattering;
        s.refractive_index = c.dot.refractive_index;
        return std::make_shared<const DotModel>(std::move(s));
    }
    }
    throw std::logic_error("unknown model kind");
}

inline const Grid2D& imaging_grid(const AnyModel& m) {
    return std::visit([](const auto& p) -> const Grid2D& { return p->grid(); }, m);
}

struct ReconstructionResult {
    Phantom phantom;
    Eigen::VectorXcd clean;
    Eigen::VectorXcd noisy;
    double noise_norm = 0.0;
    double discrepancy_target = 0.0;
    PalsModel initial;
    SolverState state;
    ShapeMetrics metrics;
};

/// One experiment: every random draw comes from a single generator seeded
/// from the config, in the order heterogeneity, data noise, initial bumps.
class Experiment {
public:
    explicit Experiment(ExperimentConfig cfg) : cfg_(std::move(cfg)), model_(build_model(cfg_)) { cfg_.validate(); }

    const ExperimentConfig& config() const { return cfg_; }
    const AnyModel& model() const { return model_; }
    const Grid2D& grid() const { return imaging_grid(model_); }

    Phantom phantom() const {
        std::mt19937_64 rng(cfg_.seed);
        return make_phantom(cfg_.phantom, grid(), rng);
    }

    /// Truth, clean and noisy data with a fresh generator.
    ReconstructionResult synthesize() const {
        std::mt19937_64 rng(cfg_.seed);
        ReconstructionResult r;
        synthesize(rng, r);
        return r;
    }

    using Observer = std::function<void(const SolverState&)>;

    ReconstructionResult reconstruct(const Observer& observer = {}) const {
        std::mt19937_64 rng(cfg_.seed);
        ReconstructionResult r;
        synthesize(rng, r);
        InitSpec spec = cfg_.init;
        if (!cfg_.solver.unknown_contrasts) {
            spec.contrast_in = cfg_.phantom.inside;
            spec.contrast_out = cfg_.phantom.outside;
        }
        r.initial = init_pals(spec, grid(), rng);
        SolverConfig sc = cfg_.solver;
        sc.discrepancy_target = r.discrepancy_target;
        sc.beta_min = cfg_.beta_min.value_or(1.0 / (20.0 * grid().bounds().diagonal()));
        std::visit(
            [&](const auto& fwd) {
                using Scalar = typename std::decay_t<decltype(*fwd)>::Scalar;
                VectorX<Scalar> data;
                if constexpr (is_complex_v<Scalar>)
                    data = r.noisy;
                else
                    data = r.noisy.real();
                PalsProblem<Scalar> prob(*fwd, std::move(data));
                r.state = run(sc, r.initial, prob, observer);
            },
            model_);
        r.metrics = shape_metrics(r.state.model, r.phantom.mask, grid());
        return r;
    }

private:
    void synthesize(std::mt19937_64& rng, ReconstructionResult& r) const {
        r.phantom = make_phantom(cfg_.phantom, grid(), rng);
        std::visit(
            [&](const auto& fwd) {
                const auto clean = fwd->predict(r.phantom.truth);
                const auto syn = add_noise(clean, cfg_.noise_percent, rng, cfg_.noise_convention);
                r.clean = syn.clean.template cast<Complex>();
                r.noisy = syn.noisy.template cast<Complex>();
                r.noise_norm = syn.noise_norm;
            },
            model_);
        r.discrepancy_target = cfg_.discrepancy_target.value_or(r.noise_norm);
    }

    ExperimentConfig cfg_;
    AnyModel model_;
};

inline std::string snapshot_name(int iteration) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "params_%04d.csv", iteration);
    return buf;
}

inline void write_phantom_outputs(const std::filesystem::path& dir, const Grid2D& g, const Phantom& ph) {
    io::write_grid_csv(dir / "truth.csv", g, ph.truth);
    io::write_pgm(dir / "truth.pgm", g, ph.truth);
}

inline void write_data_outputs(const std::filesystem::path& dir, const ExperimentConfig& c,
                               const ReconstructionResult& r) {
    io::write_data_csv<Complex>(dir / "data_clean.csv", r.clean);
    io::write_data_csv<Complex>(dir / "data_noisy.csv", r.noisy);
    io::KeyValues kv;
    kv.set("seed", c.seed);
    kv.set("noise_percent", c.noise_percent);
    kv.set("noise_norm", r.noise_norm);
    kv.set("clean_norm", r.clean.norm());
    kv.set("data_size", r.clean.size());
    kv.write(dir / "noise.txt");
}

inline void write_reconstruction_outputs(const std::filesystem::path& dir, const ExperimentConfig& c, const Grid2D& g,
                                         const ReconstructionResult& r) {
    write_phantom_outputs(dir, g, r.phantom);
    write_data_outputs(dir, c, r);
    const PalsModel& m = r.state.model;
    const Eigen::VectorXd phi = eval_phi(m, g);
    const Eigen::VectorXd prop = property_map(m, g);
    io::write_grid_csv(dir / "property.csv", g, prop);
    io::write_pgm(dir / "property.pgm", g, prop);
    io::write_grid_csv(dir / "phi.csv", g, phi);
    io::write_pgm(dir / "phi.pgm", g, phi);
    io::write_pgm(dir / "shape.pgm", g, io::mask_field(superlevel_mask(phi, m.level)), 0.0, 1.0);
    io::write_convergence_csv(dir / "convergence.csv", r.state.log);
    io::write_params_csv(dir / "params_initial.csv", r.initial);
    io::write_params_csv(dir / "params_final.csv", m);

    io::KeyValues kv;
    kv.set("model", to_string(c.model));
    kv.set("seed", c.seed);
    kv.set("stop_reason", to_string(*r.state.stop_reason));
    kv.set("iterations", r.state.iteration);
    kv.set("final_cost", r.state.cost);
    kv.set("final_residual_norm", std::sqrt(2.0 * r.state.cost));
    kv.set("discrepancy_target", r.discrepancy_target);
    kv.set("noise_norm", r.noise_norm);
    kv.set("jaccard", r.metrics.jaccard);
    kv.set("symmetric_difference", r.metrics.symmetric_difference);
    kv.set("contrast_in", r.metrics.contrast_in);
    kv.set("contrast_out", r.metrics.contrast_out);
    int active = 0;
    for (bool a : r.state.active_mask) active += a ? 1 : 0;
    kv.set("active_bumps", active);
    kv.set("bumps", m.bump_count());
    kv.write(dir / "metrics.txt");
}

} // namespace pals
