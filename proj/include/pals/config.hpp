#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <toml.hpp>

#include "pals/csrbf.hpp"
#include "pals/heaviside.hpp"
#include "pals/optim.hpp"
#include "pals/phantom.hpp"
#include "pals/synth.hpp"

namespace pals {

/// Raised for unreadable, malformed or inconsistent configuration files.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ModelKind { CT, ERT, DOT };

inline const char* to_string(ModelKind k) {
    switch (k) {
    case ModelKind::CT: return "ct";
    case ModelKind::ERT: return "ert";
    case ModelKind::DOT: return "dot";
    }
    return "?";
}

struct CtConfig {
    Rect domain{-1.0, 1.0, -1.0, 1.0};
    int nx = 64;
    int ny = 64;
    int detectors = 34;
    double angle_min_deg = 0.0;
    double angle_max_deg = 180.0;
    double angle_step_deg = 1.0;
};

struct ErtConfig {
    double background = 0.01;
    int sensors = 30;
};

struct DotConfig {
    std::vector<double> frequencies_hz{0.0, 25e6, 50e6};
    double reduced_scattering = 600.0;
    double refractive_index = 1.37;
};

struct OutputConfig {
    std::string directory = "out";
    bool snapshots = true;
};

struct ExperimentConfig {
    ModelKind model = ModelKind::CT;
    CtConfig ct;
    ErtConfig ert;
    DotConfig dot;
    PhantomSpec phantom;
    double noise_percent = 0.0;
    NoiseConvention noise_convention = NoiseConvention::Global;
    std::uint64_t seed = 1;
    InitSpec init;
    SolverConfig solver;
    /// Unset: the injected noise norm.
    std::optional<double> discrepancy_target;
    /// Unset: 1 / (20 * diagonal of the imaging domain).
    std::optional<double> beta_min;
    OutputConfig output;

    void validate() const {
        if (noise_percent < 0.0) throw ConfigError("noise.percent must be >= 0");
        if (init.heaviside == HeavisideKind::H2 && std::abs(init.level) < init.epsilon)
            throw ConfigError("pals: the h2 heaviside requires |c| >= epsilon (level = " + std::to_string(init.level) +
                              ", epsilon = " + std::to_string(init.epsilon) + ")");
        if (!(init.epsilon > 0.0)) throw ConfigError("pals.epsilon must be positive");
        if (init.bumps < 1) throw ConfigError("pals.bumps must be >= 1");
        if (solver.max_iters < 0) throw ConfigError("solver.max_iters must be >= 0");
        if (model == ModelKind::CT && (ct.nx < 1 || ct.ny < 1)) throw ConfigError("model: grid sizes must be >= 1");
        if (phantom.shapes.empty()) throw ConfigError("phantom: at least one shape is required");
        try {
            solver.validate();
            for (const auto& s : phantom.shapes) s.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
};

/// Built-in phantoms and default experiment settings for each model.
namespace presets {

/// Three-lobed body with a circular hole.
inline std::vector<Shape> ct_shapes() {
    return {Shape::lobed({0.0, 0.0}, 0.55, 0.3, 3, std::numbers::pi / 2.0), Shape::disc({0.0, 0.0}, 0.25, true)};
}

/// Blob whose lower boundary is pushed upwards (downward-facing concavity).
inline std::vector<Shape> ert_shapes() {
    return {Shape::disc({0.0, -0.45}, 0.3), Shape::disc({0.0, -0.8}, 0.2, true)};
}

/// Two separated blobs (coordinates in metres).
inline std::vector<Shape> dot_shapes() {
    return {Shape::disc({0.015, 0.025}, 0.006), Shape::disc({0.035, 0.025}, 0.006)};
}

inline void apply(ExperimentConfig& c, ModelKind k) {
    c.model = k;
    switch (k) {
    case ModelKind::CT:
        c.phantom = {ct_shapes(), 2.5, 1.0, 0.0};
        c.noise_percent = 5.0;
        c.init.bumps = 50;
        c.init.box = {-0.8, 0.8, -0.8, 0.8};
        c.init.dilation = 2.5;
        c.init.contrast_in = 1.5;
        c.init.contrast_out = 0.5;
        break;
    case ModelKind::ERT:
        c.phantom = {ert_shapes(), 0.05, 0.01, 0.0};
        c.noise_percent = 1.0;
        c.init.bumps = 40;
        c.init.box = {-0.4, 0.4, -0.8, 0.0};
        c.init.dilation = 4.0;
        c.init.contrast_in = 0.01;
        c.init.contrast_out = 0.005;
        break;
    case ModelKind::DOT:
        c.phantom = {dot_shapes(), 1.5, 0.5, 0.02};
        c.noise_percent = 0.1;
        c.init.bumps = 20;
        c.init.box = {0.0, 0.05, 0.0, 0.05};
        c.init.dilation = 80.0;
        c.init.contrast_in = 1.5;
        c.init.contrast_out = 0.5;
        c.solver.max_iters = 250;
        break;
    }
}

} // namespace presets

namespace detail {

inline std::string where(const toml::node& n) {
    const auto& src = n.source();
    std::string s;
    if (src.path) s += *src.path + ":";
    s += std::to_string(src.begin.line) + ":" + std::to_string(src.begin.column);
    return s;
}

/// Typed view on one table that records which keys were consumed.
class Section {
public:
    Section(const toml::table& t, std::string name) : t_(&t), name_(std::move(name)) {}

    const std::string& name() const { return name_; }
    const toml::table& table() const { return *t_; }

    const toml::node* node(std::string_view key) {
        used_.insert(std::string(key));
        return t_->get(key);
    }

    [[noreturn]] void fail(const toml::node& n, std::string_view key, const std::string& what) const {
        throw ConfigError(where(n) + ": " + name_ + "." + std::string(key) + ": " + what);
    }

    template <class T>
    bool read(std::string_view key, T& out) {
        const toml::node* n = node(key);
        if (!n) return false;
        if constexpr (std::is_same_v<T, bool>) {
            auto v = n->value<bool>();
            if (!n->is_boolean() || !v) fail(*n, key, "expected a boolean");
            out = *v;
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!n->is_string()) fail(*n, key, "expected a string");
            out = *n->value<std::string>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!n->is_integer()) fail(*n, key, "expected an integer");
            out = static_cast<T>(*n->value<std::int64_t>());
        } else {
            if (!n->is_number()) fail(*n, key, "expected a number");
            out = static_cast<T>(*n->value<double>());
        }
        return true;
    }

    template <class T>
    bool read(std::string_view key, std::optional<T>& out) {
        T v{};
        if (!read(key, v)) return false;
        out = v;
        return true;
    }

    std::vector<double> numbers(const toml::node& n, std::string_view key, std::size_t expected = 0) const {
        const auto* arr = n.as_array();
        if (!arr) fail(n, key, "expected an array of numbers");
        std::vector<double> v;
        for (const auto& e : *arr) {
            if (!e.is_number()) fail(e, key, "expected an array of numbers");
            v.push_back(*e.value<double>());
        }
        if (expected && v.size() != expected) fail(n, key, "expected " + std::to_string(expected) + " numbers");
        return v;
    }

    bool read_numbers(std::string_view key, std::vector<double>& out, std::size_t expected = 0) {
        const toml::node* n = node(key);
        if (!n) return false;
        out = numbers(*n, key, expected);
        return true;
    }

    void finish() const {
        for (const auto& [k, v] : *t_)
            if (!used_.count(std::string(k.str())))
                throw ConfigError(where(v) + ": unknown key '" + std::string(k.str()) + "' in [" + name_ + "]");
    }

private:
    const toml::table* t_;
    std::string name_;
    std::set<std::string> used_;
};

inline Section section(const toml::table& root, const char* name) {
    const toml::node* n = root.get(name);
    if (!n) throw ConfigError("missing section [" + std::string(name) + "]");
    const auto* t = n->as_table();
    if (!t) throw ConfigError(where(*n) + ": [" + std::string(name) + "] must be a table");
    return Section(*t, name);
}

inline Vec2 point(const Section& s, const toml::node& n, std::string_view key) {
    const auto v = s.numbers(n, key, 2);
    return {v[0], v[1]};
}

inline Shape parse_shape(const Section& parent, const toml::node& n) {
    const auto* t = n.as_table();
    if (!t) parent.fail(n, "shapes", "each shape must be a table");
    Section s(*t, parent.name() + ".shapes");
    std::string type;
    if (!s.read("type", type)) parent.fail(n, "shapes", "shape needs a 'type' (disc, ellipse, lobed or polygon)");
    bool subtract = false;
    s.read("subtract", subtract);
    Shape out;
    auto need = [&](std::string_view key) -> const toml::node& {
        const toml::node* v = s.node(key);
        if (!v) parent.fail(n, "shapes", type + " needs '" + std::string(key) + "'");
        return *v;
    };
    if (type == "disc") {
        const Vec2 c = point(s, need("center"), "center");
        double r = 0.0;
        s.read("radius", r);
        out = Shape::disc(c, r, subtract);
    } else if (type == "ellipse") {
        const Vec2 c = point(s, need("center"), "center");
        const Vec2 ax = point(s, need("semi_axes"), "semi_axes");
        double deg = 0.0;
        s.read("rotation_deg", deg);
        out = Shape::ellipse(c, ax, deg * std::numbers::pi / 180.0, subtract);
    } else if (type == "lobed") {
        const Vec2 c = point(s, need("center"), "center");
        double r = 0.0, amp = 0.0, deg = 0.0;
        int lobes = 0;
        s.read("radius", r);
        s.read("amplitude", amp);
        s.read("lobes", lobes);
        s.read("rotation_deg", deg);
        out = Shape::lobed(c, r, amp, lobes, deg * std::numbers::pi / 180.0, subtract);
    } else if (type == "polygon") {
        const toml::node& v = need("vertices");
        const auto* arr = v.as_array();
        if (!arr) s.fail(v, "vertices", "expected an array of [x, y] pairs");
        std::vector<Vec2> pts;
        for (const auto& e : *arr) pts.push_back(point(s, e, "vertices"));
        out = Shape::polygon(std::move(pts), subtract);
    } else {
        s.fail(*t->get("type"), "type", "unknown shape type '" + type + "'");
    }
    try {
        out.validate();
    } catch (const std::invalid_argument& e) {
        parent.fail(n, "shapes", e.what());
    }
    s.finish();
    return out;
}

inline Rect rect_from(const Section& s, const toml::node& n, std::string_view key) {
    const auto v = s.numbers(n, key, 4);
    if (!(v[0] < v[1] && v[2] < v[3])) s.fail(n, key, "expected [x0, x1, y0, y1] with x0 < x1 and y0 < y1");
    return {v[0], v[1], v[2], v[3]};
}

} // namespace detail

/// Builds a configuration from a parsed TOML document. Sections [model],
/// [phantom], [pals], [solver], [noise] and [output] must all be present
/// (possibly empty); omitted keys take the model's defaults.
inline ExperimentConfig config_from_toml(const toml::table& root) {
    using detail::Section;
    ExperimentConfig c;

    for (const char* name : {"model", "phantom", "pals", "solver", "noise", "output"}) detail::section(root, name);
    for (const auto& [k, v] : root)
        if (!v.is_table() && k.str() != "seed")
            throw ConfigError(detail::where(v) + ": unknown top-level key '" + std::string(k.str()) + "'");
    if (const toml::node* s = root.get("seed")) {
        if (!s->is_integer() || *s->value<std::int64_t>() < 0)
            throw ConfigError(detail::where(*s) + ": seed: expected a non-negative integer");
        c.seed = static_cast<std::uint64_t>(*s->value<std::int64_t>());
    }
    for (const auto& [k, v] : root)
        if (v.is_table()) {
            const std::string name(k.str());
            if (name != "model" && name != "phantom" && name != "pals" && name != "solver" && name != "noise" &&
                name != "output")
                throw ConfigError(detail::where(v) + ": unknown section [" + name + "]");
        }

    Section model = detail::section(root, "model");
    std::string kind;
    if (!model.read("kind", kind)) throw ConfigError(detail::where(model.table()) + ": model.kind is required");
    if (kind == "ct")
        presets::apply(c, ModelKind::CT);
    else if (kind == "ert")
        presets::apply(c, ModelKind::ERT);
    else if (kind == "dot")
        presets::apply(c, ModelKind::DOT);
    else
        model.fail(*model.table().get("kind"), "kind", "expected one of ct, ert, dot (got '" + kind + "')");

    switch (c.model) {
    case ModelKind::CT:
        model.read("nx", c.ct.nx);
        model.read("ny", c.ct.ny);
        model.read("detectors", c.ct.detectors);
        model.read("angle_min_deg", c.ct.angle_min_deg);
        model.read("angle_max_deg", c.ct.angle_max_deg);
        model.read("angle_step_deg", c.ct.angle_step_deg);
        if (const toml::node* n = model.node("domain")) c.ct.domain = detail::rect_from(model, *n, "domain");
        break;
    case ModelKind::ERT:
        model.read("background", c.ert.background);
        model.read("sensors", c.ert.sensors);
        break;
    case ModelKind::DOT:
        model.read_numbers("frequencies_hz", c.dot.frequencies_hz);
        model.read("reduced_scattering", c.dot.reduced_scattering);
        model.read("refractive_index", c.dot.refractive_index);
        break;
    }
    model.finish();

    Section ph = detail::section(root, "phantom");
    ph.read("inside", c.phantom.inside);
    ph.read("outside", c.phantom.outside);
    ph.read("heterogeneity", c.phantom.heterogeneity);
    if (const toml::node* n = ph.node("shapes")) {
        const auto* arr = n->as_array();
        if (!arr) ph.fail(*n, "shapes", "expected an array of tables ([[phantom.shapes]])");
        c.phantom.shapes.clear();
        for (const auto& e : *arr) c.phantom.shapes.push_back(detail::parse_shape(ph, e));
    }
    ph.finish();

    Section pals = detail::section(root, "pals");
    pals.read("bumps", c.init.bumps);
    pals.read("weight", c.init.weight);
    pals.read("dilation", c.init.dilation);
    pals.read("level", c.init.level);
    pals.read("epsilon", c.init.epsilon);
    pals.read("norm_smoothing", c.init.norm_smoothing);
    pals.read("contrast_in", c.init.contrast_in);
    pals.read("contrast_out", c.init.contrast_out);
    if (const toml::node* n = pals.node("box")) c.init.box = detail::rect_from(pals, *n, "box");
    std::string hv;
    if (pals.read("heaviside", hv)) {
        try {
            c.init.heaviside = parse_heaviside(hv);
        } catch (const std::invalid_argument& e) {
            pals.fail(*pals.table().get("heaviside"), "heaviside", e.what());
        }
    }
    int kn = 1, kl = 1;
    pals.read("kernel_dim", kn);
    pals.read("kernel_smoothness", kl);
    try {
        c.init.kernel = WendlandKernel(kn, kl);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(detail::where(pals.table()) + ": pals: " + e.what());
    }
    pals.finish();

    Section sol = detail::section(root, "solver");
    std::string scheme;
    if (sol.read("scheme", scheme)) {
        if (scheme == "lm" || scheme == "levenberg_marquardt")
            c.solver.scheme = Scheme::LevenbergMarquardt;
        else if (scheme == "gd" || scheme == "gradient_descent")
            c.solver.scheme = Scheme::GradientDescent;
        else
            sol.fail(*sol.table().get("scheme"), "scheme", "expected 'lm' or 'gd'");
    }
    std::string damping;
    if (sol.read("damping", damping)) {
        if (damping == "identity")
            c.solver.damping = Damping::Identity;
        else if (damping == "diagonal")
            c.solver.damping = Damping::Diagonal;
        else
            sol.fail(*sol.table().get("damping"), "damping", "expected 'identity' or 'diagonal'");
    }
    sol.read("lambda0", c.solver.lambda0);
    sol.read("lambda_up", c.solver.lambda_up);
    sol.read("lambda_down", c.solver.lambda_down);
    sol.read("max_iters", c.solver.max_iters);
    sol.read("max_retries", c.solver.max_retries);
    sol.read("stagnation_tol", c.solver.stagnation_tol);
    sol.read("stagnation_window", c.solver.stagnation_window);
    sol.read("min_step", c.solver.min_step);
    sol.read("unknown_contrasts", c.solver.unknown_contrasts);
    sol.read("discrepancy_target", c.discrepancy_target);
    sol.read("beta_min", c.beta_min);
    sol.finish();

    Section noise = detail::section(root, "noise");
    noise.read("percent", c.noise_percent);
    std::string conv;
    if (noise.read("convention", conv)) {
        if (conv == "global")
            c.noise_convention = NoiseConvention::Global;
        else if (conv == "per_sample")
            c.noise_convention = NoiseConvention::PerSample;
        else
            noise.fail(*noise.table().get("convention"), "convention", "expected 'global' or 'per_sample'");
    }
    noise.finish();

    Section out = detail::section(root, "output");
    out.read("directory", c.output.directory);
    out.read("snapshots", c.output.snapshots);
    out.finish();

    c.validate();
    return c;
}

inline ExperimentConfig parse_config(std::string_view text, std::string_view source = "config") {
    try {
        return config_from_toml(toml::parse(text, source));
    } catch (const toml::parse_error& e) {
        const auto& s = e.source();
        throw ConfigError(std::string(source) + ":" + std::to_string(s.begin.line) + ":" +
                          std::to_string(s.begin.column) + ": " + std::string(e.description()));
    }
}

inline ExperimentConfig load_config(const std::string& path) {
    try {
        return config_from_toml(toml::parse_file(path));
    } catch (const toml::parse_error& e) {
        const auto& s = e.source();
        throw ConfigError(path + ":" + std::to_string(s.begin.line) + ":" + std::to_string(s.begin.column) + ": " +
                          std::string(e.description()));
    }
}

} // namespace pals
