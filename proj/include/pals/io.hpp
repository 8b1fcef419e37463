#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pals/forward.hpp"
#include "pals/grid.hpp"
#include "pals/model.hpp"
#include "pals/optim.hpp"

namespace pals::io {

inline std::ofstream open(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << std::setprecision(17);
    return f;
}

inline void write_edges(std::ostream& os, const char* name, const std::vector<double>& e) {
    os << "# " << name;
    for (double v : e) os << ',' << v;
    os << '\n';
}

/// Cell field as CSV: two comment lines with the x and y edges, then one
/// row per y index (ascending), one column per x index.
inline void write_grid_csv(const std::filesystem::path& path, const Grid2D& g, const Eigen::VectorXd& v) {
    require_on_grid(g, v.size(), "grid CSV");
    auto f = open(path);
    write_edges(f, "x_edges", g.x_edges());
    write_edges(f, "y_edges", g.y_edges());
    for (Index iy = 0; iy < g.ny(); ++iy) {
        for (Index ix = 0; ix < g.nx(); ++ix) {
            if (ix) f << ',';
            f << v[g.index(ix, iy)];
        }
        f << '\n';
    }
}

inline Eigen::VectorXd read_grid_csv(const std::filesystem::path& path, Grid2D* grid = nullptr) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path.string());
    std::vector<double> xe, ye, vals;
    std::string line;
    auto split = [](const std::string& s, std::vector<double>& out) {
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    };
    while (std::getline(f, line)) {
        if (line.rfind("# x_edges,", 0) == 0)
            split(line.substr(10), xe);
        else if (line.rfind("# y_edges,", 0) == 0)
            split(line.substr(10), ye);
        else if (!line.empty())
            split(line, vals);
    }
    Grid2D g(xe, ye);
    if (static_cast<Index>(vals.size()) != g.size()) throw std::runtime_error(path.string() + ": value count mismatch");
    Eigen::VectorXd v(g.size());
    for (Index iy = 0, k = 0; iy < g.ny(); ++iy)
        for (Index ix = 0; ix < g.nx(); ++ix, ++k) v[g.index(ix, iy)] = vals[static_cast<std::size_t>(k)];
    if (grid) *grid = g;
    return v;
}

/// 8-bit binary PGM, linearly scaled to [lo, hi] (defaults to the data
/// range), top image row = largest y.
inline void write_pgm(const std::filesystem::path& path, const Grid2D& g, const Eigen::VectorXd& v,
                      std::optional<double> lo = {}, std::optional<double> hi = {}) {
    require_on_grid(g, v.size(), "PGM");
    const double a = lo.value_or(v.minCoeff());
    const double b = hi.value_or(v.maxCoeff());
    const double span = b > a ? b - a : 1.0;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << "P5\n" << g.nx() << ' ' << g.ny() << "\n255\n";
    for (Index iy = g.ny() - 1; iy >= 0; --iy)
        for (Index ix = 0; ix < g.nx(); ++ix) {
            const double t = std::clamp((v[g.index(ix, iy)] - a) / span, 0.0, 1.0);
            f.put(static_cast<char>(static_cast<std::uint8_t>(std::lround(255.0 * t))));
        }
}

inline Eigen::VectorXd mask_field(const std::vector<bool>& mask) {
    Eigen::VectorXd v(static_cast<Index>(mask.size()));
    for (std::size_t i = 0; i < mask.size(); ++i) v[static_cast<Index>(i)] = mask[i] ? 1.0 : 0.0;
    return v;
}

/// Data vector as CSV with columns index,re,im.
template <class Scalar>
void write_data_csv(const std::filesystem::path& path, const VectorX<Scalar>& d) {
    auto f = open(path);
    f << "index,re,im\n";
    for (Index k = 0; k < d.size(); ++k) {
        if constexpr (is_complex_v<Scalar>)
            f << k << ',' << d[k].real() << ',' << d[k].imag() << '\n';
        else
            f << k << ',' << d[k] << ",0\n";
    }
}

inline void write_convergence_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& log) {
    auto f = open(path);
    f << "iteration,cost,lambda,active_bumps,p_i,p_o\n";
    for (const auto& r : log)
        f << r.iteration << ',' << r.cost << ',' << r.lambda << ',' << r.active_bumps << ',' << r.contrast_in << ','
          << r.contrast_out << '\n';
}

/// PaLS parameters: one row per bump, contrasts and level set settings as
/// comment lines.
inline void write_params_csv(const std::filesystem::path& path, const PalsModel& m) {
    auto f = open(path);
    f << "# contrast_in," << m.contrast_in << '\n';
    f << "# contrast_out," << m.contrast_out << '\n';
    f << "# level," << m.level << '\n';
    f << "# epsilon," << m.epsilon << '\n';
    f << "# heaviside," << to_string(m.heaviside) << '\n';
    f << "# norm_smoothing," << m.norm_smoothing << '\n';
    f << "bump,alpha,beta,chi_x,chi_y\n";
    for (std::size_t j = 0; j < m.bumps.size(); ++j) {
        const Bump& b = m.bumps[j];
        f << j << ',' << b.weight << ',' << b.dilation << ',' << b.center.x() << ',' << b.center.y() << '\n';
    }
}

/// Flat key=value file; keys keep insertion order.
class KeyValues {
public:
    template <class T>
    void set(const std::string& key, const T& value) {
        std::ostringstream os;
        os << std::setprecision(17) << value;
        for (auto& [k, v] : items_)
            if (k == key) {
                v = os.str();
                return;
            }
        items_.emplace_back(key, os.str());
    }

    const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }

    void write(const std::filesystem::path& path) const {
        auto f = open(path);
        for (const auto& [k, v] : items_) f << k << '=' << v << '\n';
    }

    static std::map<std::string, std::string> read(const std::filesystem::path& path) {
        std::ifstream f(path);
        if (!f) throw std::runtime_error("cannot read " + path.string());
        std::map<std::string, std::string> out;
        std::string line;
        while (std::getline(f, line)) {
            const auto eq = line.find('=');
            if (eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 1);
        }
        return out;
    }

private:
    std::vector<std::pair<std::string, std::string>> items_;
};

} // namespace pals::io
