#include "tfd/presets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "tfd/errors.hpp"
#include "tfd/grid.hpp"

namespace tfd {

namespace {

double take_param(ParamMap& params, const std::string& key, double fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    const double v = it->second;
    params.erase(it);
    return v;
}

void reject_leftovers(const ParamMap& params, const std::string& preset) {
    if (!params.empty())
        throw ConfigError("unknown parameter '" + params.begin()->first + "' for preset '" +
                          preset + "'");
}

/// Numerically scans max_t |f(t)| over [0, hi] (used for analytic sup hints).
template <typename F>
double scan_max(F&& f, double hi) {
    double m = 0.0;
    const int n = 20000;
    for (int q = 0; q <= n; ++q) m = std::max(m, std::abs(f(hi * q / n)));
    return m;
}

}  // namespace

// ============================================================================
// Velocity presets
// ============================================================================

std::vector<std::string> velocity_preset_names() {
    return {"zero", "rotation", "steep", "cellular"};
}

static VelocityField make_rotation(const std::string& name, ParamMap params, double def_omega,
                                   double def_rin, double def_rout, double def_zin,
                                   double def_zout) {
    const double omega = take_param(params, "omega", def_omega);
    const double r_in = take_param(params, "r_in", def_rin);
    const double r_out = take_param(params, "r_out", def_rout);
    const double z_in = take_param(params, "z_in", def_zin);
    const double z_out = take_param(params, "z_out", def_zout);
    reject_leftovers(params, name);
    if (!(0.0 < r_in && r_in < r_out) || !(0.0 < z_in && z_in < z_out))
        throw ConfigError("rotation preset: need 0 < r_in < r_out and 0 < z_in < z_out");

    const Falloff radial{r_in, r_out};
    const Falloff axial{z_in, z_out};

    VelocityField v;
    v.name = name;
    v.planar_rotation = true;
    v.omega = omega;
    v.rigid_radius = r_in;
    v.rigid_halfheight = z_in;
    v.spin = [=](const Vec3& x) {
        const double r = std::hypot(x.x, x.y);
        return omega * radial.value(r) * axial.value(std::abs(x.z));
    };
    auto spin = v.spin;
    v.value = [spin](double, const Vec3& x) -> Vec3 {
        const double w = spin(x);
        return {-w * x.y, w * x.x, 0.0};
    };
    v.sup_hint = scan_max([&](double r) { return omega * r * radial.value(r); }, r_out);
    return v;
}

VelocityField make_velocity_preset(const std::string& name, const ParamMap& params_in) {
    ParamMap params = params_in;
    if (name == "zero") {
        reject_leftovers(params, name);
        VelocityField v;
        v.name = name;
        v.value = [](double, const Vec3&) -> Vec3 { return {0.0, 0.0, 0.0}; };
        v.planar_rotation = true;
        v.omega = 0.0;
        v.rigid_radius = 1e300;
        v.rigid_halfheight = 1e300;
        v.spin = [](const Vec3&) { return 0.0; };
        v.sup_hint = 0.0;
        return v;
    }
    if (name == "rotation") return make_rotation(name, params, 0.5, 0.85, 1.1, 0.85, 1.1);
    if (name == "steep") return make_rotation(name, params, 25.0, 0.35, 0.6, 0.5, 0.8);
    if (name == "cellular") {
        const double amp = take_param(params, "amp", 1.0);
        const double kappa = take_param(params, "kappa", 3.141592653589793);
        const double in = take_param(params, "in", 0.8);
        const double out = take_param(params, "out", 1.1);
        reject_leftovers(params, name);
        if (!(0.0 < in && in < out)) throw ConfigError("cellular preset: need 0 < in < out");

        const Falloff cut{in, out};
        // Stream function A * P(x1) * P(x2) * Z(x3) with P(t) = sin(kappa t) * cut(|t|);
        // the velocity (dP/dx2 column, -dP/dx1 column, 0) is divergence-free because
        // the mixed partials cancel exactly.
        auto P = [=](double t) { return std::sin(kappa * t) * cut.value(std::abs(t)); };
        auto Pd = [=](double t) {
            const double sgn = t < 0.0 ? -1.0 : 1.0;
            return kappa * std::cos(kappa * t) * cut.value(std::abs(t)) +
                   std::sin(kappa * t) * sgn * cut.d1(std::abs(t));
        };
        auto Z = [=](double t) { return cut.value(std::abs(t)); };

        VelocityField v;
        v.name = name;
        v.value = [=](double, const Vec3& x) -> Vec3 {
            return {amp * P(x.x) * Pd(x.y) * Z(x.z), -amp * Pd(x.x) * P(x.y) * Z(x.z), 0.0};
        };
        const double maxP = scan_max(P, out);
        const double maxPd = scan_max(Pd, out);
        v.sup_hint = amp * maxP * maxPd;
        return v;
    }
    throw ConfigError("unknown velocity preset '" + name + "'");
}

// ============================================================================
// Tabulated velocity input
// ============================================================================

namespace {

struct VelocityTable {
    GridSpec grid;
    std::vector<double> times;
    std::vector<std::vector<double>> frames;  // per time: 3 * ni*nj*nk, component-major

    Vec3 sample_frame(size_t frame, const Vec3& x) const {
        // Trilinear interpolation; zero outside the sample lattice.
        const double fi = (x.x - grid.origin.x) / grid.h;
        const double fj = (x.y - grid.origin.y) / grid.h;
        const double fk = (x.z - grid.origin.z) / grid.h;
        const auto& data = frames[frame];
        const std::int64_t nn = grid.node_count();
        auto nodal = [&](int c, int i, int j, int k) -> double {
            if (i < 0 || j < 0 || k < 0 || i >= grid.dims.i || j >= grid.dims.j ||
                k >= grid.dims.k)
                return 0.0;
            return data[static_cast<size_t>(c * nn +
                                            (static_cast<std::int64_t>(k) * grid.dims.j + j) *
                                                grid.dims.i +
                                            i)];
        };
        const int i0 = static_cast<int>(std::floor(fi));
        const int j0 = static_cast<int>(std::floor(fj));
        const int k0 = static_cast<int>(std::floor(fk));
        const double ai = fi - i0, aj = fj - j0, ak = fk - k0;
        Vec3 out;
        for (int c = 0; c < 3; ++c) {
            double acc = 0.0;
            for (int di = 0; di <= 1; ++di)
                for (int dj = 0; dj <= 1; ++dj)
                    for (int dk = 0; dk <= 1; ++dk) {
                        const double w = (di ? ai : 1.0 - ai) * (dj ? aj : 1.0 - aj) *
                                         (dk ? ak : 1.0 - ak);
                        acc += w * nodal(c, i0 + di, j0 + dj, k0 + dk);
                    }
            out[c] = acc;
        }
        return out;
    }
};

}  // namespace

VelocityField load_velocity_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open velocity file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ConfigError("velocity file '" + path + "' is empty");

    // Header: column names followed by key=value metadata tokens.
    double h = 0.0;
    Vec3 origin;
    Vec3i dims;
    {
        std::stringstream ss(line);
        std::string tok;
        std::map<std::string, double> meta;
        while (std::getline(ss, tok, ',')) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) continue;
            meta[tok.substr(0, eq)] = std::stod(tok.substr(eq + 1));
        }
        for (const char* key : {"h", "ox", "oy", "oz", "ni", "nj", "nk"})
            if (!meta.count(key))
                throw ConfigError("velocity file header is missing metadata key '" +
                                  std::string(key) + "'");
        h = meta["h"];
        origin = {meta["ox"], meta["oy"], meta["oz"]};
        dims = {static_cast<int>(meta["ni"]), static_cast<int>(meta["nj"]),
                static_cast<int>(meta["nk"])};
    }

    auto table = std::make_shared<VelocityTable>();
    table->grid = GridSpec(h, origin, dims);
    const std::int64_t nn = table->grid.node_count();

    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        double vals[7];
        std::string tok;
        for (int c = 0; c < 7; ++c) {
            if (!std::getline(ss, tok, ','))
                throw ConfigError("velocity file '" + path + "': short row at line " +
                                  std::to_string(lineno));
            vals[c] = std::stod(tok);
        }
        const double t = vals[0];
        const int i = static_cast<int>(vals[1]), j = static_cast<int>(vals[2]),
                  k = static_cast<int>(vals[3]);
        if (i < 0 || j < 0 || k < 0 || i >= dims.i || j >= dims.j || k >= dims.k)
            throw ConfigError("velocity file '" + path + "': index out of range at line " +
                              std::to_string(lineno));
        if (table->times.empty() || t > table->times.back()) {
            table->times.push_back(t);
            table->frames.emplace_back(static_cast<size_t>(3 * nn), 0.0);
        } else if (t < table->times.back()) {
            throw ConfigError("velocity file '" + path + "': rows must be grouped by ascending time");
        }
        auto& frame = table->frames.back();
        const std::int64_t at = (static_cast<std::int64_t>(k) * dims.j + j) * dims.i + i;
        for (int c = 0; c < 3; ++c) frame[static_cast<size_t>(c * nn + at)] = vals[4 + c];
    }
    if (table->times.empty()) throw ConfigError("velocity file '" + path + "' has no sample rows");

    VelocityField v;
    v.name = "tabulated";
    v.time_independent = table->times.size() == 1;
    v.divergence_free = false;  // not guaranteed for external data
    v.value = [table](double t, const Vec3& x) -> Vec3 {
        const auto& times = table->times;
        if (times.size() == 1 || t <= times.front()) return table->sample_frame(0, x);
        if (t >= times.back()) return table->sample_frame(times.size() - 1, x);
        const auto hi = std::upper_bound(times.begin(), times.end(), t);
        const size_t q1 = static_cast<size_t>(hi - times.begin());
        const size_t q0 = q1 - 1;
        const double a = (t - times[q0]) / (times[q1] - times[q0]);
        const Vec3 v0 = table->sample_frame(q0, x);
        const Vec3 v1 = table->sample_frame(q1, x);
        return (1.0 - a) * v0 + a * v1;
    };
    double m = 0.0;
    for (const auto& frame : table->frames)
        for (double s : frame) m = std::max(m, std::abs(s));
    v.sup_hint = m;
    return v;
}

// ============================================================================
// Initial data
// ============================================================================

double InitialData::value(const Vec3& x) const {
    double acc = 0.0;
    for (const auto& term : terms) {
        const Vec3 d = x - term.center;
        acc += term.profile(dot(d, d));
    }
    return acc;
}

Vec3 InitialData::gradient(const Vec3& x) const {
    Vec3 acc;
    for (const auto& term : terms) {
        const Vec3 d = x - term.center;
        acc = acc + (2.0 * term.profile_d1(dot(d, d))) * d;
    }
    return acc;
}

Mat3 InitialData::hessian(const Vec3& x) const {
    Mat3 acc;
    for (const auto& term : terms) {
        const Vec3 d = x - term.center;
        const double s = dot(d, d);
        const double f1 = term.profile_d1(s);
        const double f2 = term.profile_d2(s);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                acc(r, c) += 2.0 * f1 * (r == c ? 1.0 : 0.0) + 4.0 * f2 * d[r] * d[c];
    }
    return acc;
}

std::vector<std::string> initial_preset_names() { return {"bump", "double-bump", "sphere"}; }

namespace {

InitialData::RadialTerm bump_term(const Vec3& center, double amp, double width) {
    if (!(width > 0.0)) throw ConfigError("initial preset: width must be positive");
    const double radius = 2.5 * width;
    InitialData::RadialTerm term;
    term.center = center;
    term.amp = amp;
    term.lambda = 1.0 / (width * width);
    const double r_on = 0.65 * radius;
    term.cut = Falloff{r_on * r_on, radius * radius};
    return term;
}

}  // namespace

InitialData make_initial_preset(const std::string& name, const ParamMap& params_in) {
    ParamMap params = params_in;
    InitialData f;
    f.name = name;
    if (name == "bump") {
        const double amp = take_param(params, "amp", 1.0);
        const double width = take_param(params, "width", 0.25);
        const Vec3 c{take_param(params, "cx", 0.3), take_param(params, "cy", 0.0),
                     take_param(params, "cz", 0.0)};
        reject_leftovers(params, name);
        f.terms.push_back(bump_term(c, amp, width));
        f.sup_bound = std::abs(amp);
        f.support_center = c;
        f.support_radius = 2.5 * width;
        return f;
    }
    if (name == "double-bump") {
        const double amp = take_param(params, "amp", 1.0);
        const double amp2 = take_param(params, "amp2", -0.6);
        const double width = take_param(params, "width", 0.2);
        const double width2 = take_param(params, "width2", 0.15);
        const Vec3 c1{take_param(params, "cx", 0.3), take_param(params, "cy", 0.0),
                      take_param(params, "cz", 0.0)};
        const Vec3 c2{take_param(params, "cx2", -0.25), take_param(params, "cy2", 0.2),
                      take_param(params, "cz2", 0.1)};
        reject_leftovers(params, name);
        f.terms.push_back(bump_term(c1, amp, width));
        f.terms.push_back(bump_term(c2, amp2, width2));
        f.sup_bound = std::abs(amp) + std::abs(amp2);
        // Enclosing ball of the two supports.
        const Vec3 mid = 0.5 * (c1 + c2);
        f.support_center = mid;
        f.support_radius =
            0.5 * norm2(c1 - c2) + std::max(2.5 * width, 2.5 * width2);
        return f;
    }
    if (name == "sphere") {
        const double radius = take_param(params, "radius", 0.5);
        const Vec3 c{take_param(params, "cx", 0.3), take_param(params, "cy", 0.0),
                     take_param(params, "cz", 0.0)};
        reject_leftovers(params, name);
        if (!(radius > 0.0)) throw ConfigError("sphere preset: radius must be positive");
        // Value 2 * 2^(-s / radius^2) with s = |x - c|^2: equals 1 exactly on
        // |x - c| = radius and decreases strictly in s, so the unit level set
        // is the sphere.  The cutoff engages only where the value is < 1/2.
        InitialData::RadialTerm term;
        term.center = c;
        term.amp = 2.0;
        term.lambda = std::log(2.0) / (radius * radius);
        term.cut = Falloff{2.0 * radius * radius, 4.0 * radius * radius};
        f.terms.push_back(term);
        f.sup_bound = 2.0;
        f.support_center = c;
        f.support_radius = 2.0 * radius;
        return f;
    }
    throw ConfigError("unknown initial-data preset '" + name + "'");
}

}  // namespace tfd
