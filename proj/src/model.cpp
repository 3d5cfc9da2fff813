#include "omlp/model.hpp"

#include "omlp/math.hpp"

#include <nlohmann/json.hpp>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace omlp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

// ---------------------------------------------------------------------------
// LevyMeasure
// ---------------------------------------------------------------------------

LevyMeasure::LevyMeasure(double c_plus, double c_minus, double lambda_plus,
                         double lambda_minus, double alpha_plus,
                         double alpha_minus)
    : c_plus_(c_plus),
      c_minus_(c_minus),
      lambda_plus_(lambda_plus),
      lambda_minus_(lambda_minus),
      alpha_plus_(alpha_plus),
      alpha_minus_(alpha_minus) {
    if (c_plus_ < 0.0 || c_minus_ < 0.0) {
        throw ConfigError("levy: C1 and C2 must be nonnegative");
    }
    if (lambda_plus_ <= 0.0 || lambda_minus_ <= 0.0) {
        throw ConfigError("levy: lambda1 and lambda2 must be positive");
    }
    if (alpha_plus_ >= 2.0 || alpha_minus_ >= 2.0) {
        throw ConfigError("levy: alpha1 and alpha2 must be < 2");
    }
}

bool LevyMeasure::is_symmetric() const {
    return c_plus_ == c_minus_ && lambda_plus_ == lambda_minus_ &&
           alpha_plus_ == alpha_minus_;
}

double LevyMeasure::side_moment(bool positive_side, double p, double a,
                                double b) const {
    const double c = positive_side ? c_plus_ : c_minus_;
    const double lambda = positive_side ? lambda_plus_ : lambda_minus_;
    const double alpha = positive_side ? alpha_plus_ : alpha_minus_;
    if (c == 0.0 || a >= b) return 0.0;

    // int_a^b z^{p-1-alpha} e^{-lambda z} dz
    //   = lambda^{alpha-p} [Gamma(p-alpha, lambda a) - Gamma(p-alpha, lambda b)]
    const double s = p - alpha;
    if (a == 0.0 && s <= 0.0) {
        throw DomainError("levy moment diverges at the origin (p <= alpha)");
    }
    const double upper_a = upper_incomplete_gamma(s, lambda * a);
    const double upper_b =
        std::isinf(b) ? 0.0 : upper_incomplete_gamma(s, lambda * b);
    return c * std::pow(lambda, alpha - p) * (upper_a - upper_b);
}

double LevyMeasure::side_moment_quadrature(bool positive_side, double p,
                                           double a, double b) const {
    const double c = positive_side ? c_plus_ : c_minus_;
    const double lambda = positive_side ? lambda_plus_ : lambda_minus_;
    const double alpha = positive_side ? alpha_plus_ : alpha_minus_;
    if (c == 0.0 || a >= b) return 0.0;
    if (a == 0.0 && p - alpha <= 0.0) {
        throw DomainError("levy moment diverges at the origin (p <= alpha)");
    }

    auto integrand = [&](double z) {
        return std::pow(z, p - 1.0 - alpha) * std::exp(-lambda * z);
    };

    double total = 0.0;
    const double split = std::isinf(b) ? std::max(1.0, a) : b;
    if (a < split) {
        boost::math::quadrature::tanh_sinh<double> quad;
        total += quad.integrate(integrand, a, split);
    }
    if (std::isinf(b)) {
        boost::math::quadrature::exp_sinh<double> quad;
        total += quad.integrate([&](double t) { return integrand(split + t); },
                                0.0, kInf) ;
    }
    return c * total;
}

namespace {

struct RegionBounds {
    double lo;
    double hi;
};

RegionBounds region_bounds(MomentRegion region, double cutoff) {
    switch (region) {
        case MomentRegion::small: return {0.0, cutoff};
        case MomentRegion::tail: return {cutoff, kInf};
        case MomentRegion::signed_tail: return {cutoff, kInf};
        case MomentRegion::all: return {0.0, kInf};
    }
    throw DomainError("unknown moment region");
}

}  // namespace

double LevyMeasure::moment(int p, MomentRegion region, double cutoff) const {
    if (p < 1) throw DomainError("levy_moment: p must be >= 1");
    const RegionBounds b = region_bounds(region, cutoff);
    const double sign_neg =
        (region == MomentRegion::signed_tail && p % 2 == 1) ? -1.0 : 1.0;
    return side_moment(true, p, b.lo, b.hi) +
           sign_neg * side_moment(false, p, b.lo, b.hi);
}

double LevyMeasure::moment_quadrature(int p, MomentRegion region,
                                      double cutoff) const {
    if (p < 1) throw DomainError("levy_moment: p must be >= 1");
    const RegionBounds b = region_bounds(region, cutoff);
    const double sign_neg =
        (region == MomentRegion::signed_tail && p % 2 == 1) ? -1.0 : 1.0;
    return side_moment_quadrature(true, p, b.lo, b.hi) +
           sign_neg * side_moment_quadrature(false, p, b.lo, b.hi);
}

double LevyMeasure::signed_moment(int m) const {
    if (m < 2) {
        throw DomainError("signed_moment: full-range moments need m >= 2");
    }
    const double sign_neg = (m % 2 == 1) ? -1.0 : 1.0;
    return side_moment(true, m, 0.0, kInf) +
           sign_neg * side_moment(false, m, 0.0, kInf);
}

double LevyMeasure::signed_tail_first_moment() const {
    return side_moment(true, 1.0, 1.0, kInf) -
           side_moment(false, 1.0, 1.0, kInf);
}

double LevyMeasure::signed_mid_first_moment(double r0) const {
    return side_moment(true, 1.0, r0, 1.0) - side_moment(false, 1.0, r0, 1.0);
}

double LevyMeasure::tail_mass(double a) const {
    if (a <= 0.0) throw DomainError("tail_mass: cutoff must be positive");
    return side_moment(true, 0.0, a, kInf) + side_moment(false, 0.0, a, kInf);
}

double validate_levy_measure(const LevyMeasure& nu, double m) {
    if (m <= 0.0) throw DomainError("validate_levy_measure: m must be > 0");
    if (nu.is_null()) return 0.0;
    if (nu.c_plus() > 0.0 && m >= nu.lambda_plus()) {
        std::ostringstream msg;
        msg << "exponential moment diverges on the positive tail: m=" << m
            << " >= lambda1=" << nu.lambda_plus();
        throw ValidationError(msg.str());
    }
    if (nu.c_minus() > 0.0 && m >= nu.lambda_minus()) {
        std::ostringstream msg;
        msg << "exponential moment diverges on the negative tail: m=" << m
            << " >= lambda2=" << nu.lambda_minus();
        throw ValidationError(msg.str());
    }

    // int_1^inf e^{mz} C e^{-lambda z} z^{-1-alpha} dz per side; the
    // tempering survives because m < lambda.
    auto side = [&](double c, double lambda, double alpha) {
        if (c == 0.0) return 0.0;
        boost::math::quadrature::exp_sinh<double> quad;
        const double rate = lambda - m;
        return c * quad.integrate(
                       [&](double t) {
                           const double z = 1.0 + t;
                           return std::exp(-rate * z) *
                                  std::pow(z, -1.0 - alpha);
                       },
                       0.0, kInf);
    };
    return side(nu.c_plus(), nu.lambda_plus(), nu.alpha_plus()) +
           side(nu.c_minus(), nu.lambda_minus(), nu.alpha_minus());
}

double levy_moment(const LevyMeasure& nu, int p, MomentRegion region,
                   double cutoff) {
    return nu.moment(p, region, cutoff);
}

// ---------------------------------------------------------------------------
// ControlGrid
// ---------------------------------------------------------------------------

ControlGrid::ControlGrid(std::vector<double> points)
    : points_(std::move(points)) {
    if (points_.empty()) {
        throw ConfigError("control grid must be non-empty");
    }
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (!(points_[i] > points_[i - 1])) {
            throw ConfigError(
                "control grid points must be strictly increasing");
        }
    }
}

ControlGrid ControlGrid::uniform(double lo, double hi, int n) {
    if (n < 1) throw ConfigError("control grid needs at least one point");
    if (n == 1) return ControlGrid({0.5 * (lo + hi)});
    if (!(hi > lo)) throw ConfigError("control grid range is degenerate");
    std::vector<double> pts(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        pts[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    }
    return ControlGrid(std::move(pts));
}

// ---------------------------------------------------------------------------
// RunConfig
// ---------------------------------------------------------------------------

double RunConfig::effective_horizon(double discount) const {
    if (horizon > 0.0) return horizon;
    return -std::log(1e-4) / discount;
}

// ---------------------------------------------------------------------------
// ConfigFile
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str());
}

ConfigFile ConfigFile::parse_string(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) {
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": empty section name");
            }
            cfg.sections_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": empty key or value");
        }
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    const auto sec = sections_.find(section);
    return sec != sections_.end() && sec->second.count(key) > 0;
}

double ConfigFile::get_double(const std::string& section,
                              const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string& raw = sections_.at(section).at(key);
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(raw, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != raw.size()) {
        throw ConfigError("config [" + section + "] " + key +
                          ": not a number: " + raw);
    }
    return value;
}

long ConfigFile::get_long(const std::string& section, const std::string& key,
                          long fallback) const {
    if (!has(section, key)) return fallback;
    const double value = get_double(section, key, 0.0);
    const long rounded = static_cast<long>(std::llround(value));
    if (static_cast<double>(rounded) != value) {
        throw ConfigError("config [" + section + "] " + key +
                          ": expected an integer");
    }
    return rounded;
}

std::string ConfigFile::get_string(const std::string& section,
                                   const std::string& key,
                                   const std::string& fallback) const {
    if (!has(section, key)) return fallback;
    return sections_.at(section).at(key);
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string& raw = sections_.at(section).at(key);
    if (raw == "true") return true;
    if (raw == "false") return false;
    throw ConfigError("config [" + section + "] " + key +
                      ": expected true or false");
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

std::vector<std::string> registry_names() {
    return {"degenerate", "lq", "lq_jump", "lq_jump_asym"};
}

ControlProblem registry_problem(const std::string& name) {
    ControlProblem p;
    p.name = name;
    p.box = {-6.0, 6.0};
    p.x0 = 1.0;
    p.controls = ControlGrid::uniform(-2.0, 2.0, 21);
    p.cost = CostModel{};  // q = r = 1, c = 1, K = 64

    if (name == "degenerate") {
        p.dynamics = Dynamics{};  // b = sigma = g = 0
        p.levy = LevyMeasure(0.0, 0.0, 2.0, 2.0, 0.5, 0.5);
    } else if (name == "lq") {
        p.dynamics.drift = {-0.5, 1.0, 0.0};
        p.dynamics.diffusion = {0.0, 0.0, 0.3};
        p.dynamics.jump_scale = {0.0, 0.0, 0.0};
        p.levy = LevyMeasure(0.0, 0.0, 2.0, 2.0, 0.5, 0.5);
    } else if (name == "lq_jump") {
        p.dynamics.drift = {-0.5, 1.0, 0.0};
        p.dynamics.diffusion = {0.0, 0.0, 0.3};
        p.dynamics.jump_scale = {0.0, 0.0, 1.0};
        p.levy = LevyMeasure(0.5, 0.5, 2.0, 2.0, 0.5, 0.5);
    } else if (name == "lq_jump_asym") {
        p.dynamics.drift = {-0.5, 1.0, 0.0};
        p.dynamics.diffusion = {0.0, 0.0, 0.3};
        p.dynamics.jump_scale = {0.0, 0.0, 1.0};
        p.levy = LevyMeasure(0.6, 0.4, 2.0, 2.5, 0.5, 0.4);
    } else {
        throw ConfigError("unknown registry problem: " + name);
    }
    return p;
}

ControlProblem build_problem(const ConfigFile& config) {
    const std::string name =
        config.get_string("problem", "name", "lq_jump");
    ControlProblem p = registry_problem(name);

    if (config.has("levy", "C1") || config.has("levy", "C2")) {
        p.levy = LevyMeasure(
            config.get_double("levy", "C1", p.levy.c_plus()),
            config.get_double("levy", "C2", p.levy.c_minus()),
            config.get_double("levy", "lambda1", p.levy.lambda_plus()),
            config.get_double("levy", "lambda2", p.levy.lambda_minus()),
            config.get_double("levy", "alpha1", p.levy.alpha_plus()),
            config.get_double("levy", "alpha2", p.levy.alpha_minus()));
    }

    auto override_coeff = [&](AffineCoeff& c, const char* xk, const char* uk,
                              const char* ok) {
        c.x_slope = config.get_double("dynamics", xk, c.x_slope);
        c.u_slope = config.get_double("dynamics", uk, c.u_slope);
        c.offset = config.get_double("dynamics", ok, c.offset);
    };
    override_coeff(p.dynamics.drift, "bx", "bu", "b0");
    override_coeff(p.dynamics.diffusion, "sx", "su", "s0");
    override_coeff(p.dynamics.jump_scale, "gx", "gu", "g0");

    p.cost.q = config.get_double("cost", "q", p.cost.q);
    p.cost.r = config.get_double("cost", "r", p.cost.r);
    p.cost.lx = config.get_double("cost", "lx", p.cost.lx);
    p.cost.lu = config.get_double("cost", "lu", p.cost.lu);
    p.cost.h0 = config.get_double("cost", "h0", p.cost.h0);
    p.cost.discount = config.get_double("cost", "c", p.cost.discount);
    p.cost.lipschitz_bound =
        config.get_double("cost", "K", p.cost.lipschitz_bound);

    p.box.x_min = config.get_double("grid", "x_min", p.box.x_min);
    p.box.x_max = config.get_double("grid", "x_max", p.box.x_max);
    const int n_control = static_cast<int>(config.get_long(
        "grid", "n_control", static_cast<long>(p.controls.size())));
    const double u_min =
        config.get_double("grid", "u_min", p.controls.points().front());
    const double u_max =
        config.get_double("grid", "u_max", p.controls.points().back());
    p.controls = ControlGrid::uniform(u_min, u_max, n_control);
    p.x0 = config.get_double("problem", "x0", p.x0);

    if (p.cost.discount <= 0.0) {
        throw ConfigError("discount must be positive");
    }
    if (!(p.box.x_max > p.box.x_min)) {
        throw ConfigError("state box is degenerate: x_max must exceed x_min");
    }
    if (!(p.x0 > p.box.x_min && p.x0 < p.box.x_max)) {
        throw ConfigError("initial state x0 must lie strictly inside the box");
    }
    if (p.cost.lipschitz_bound <= 0.0) {
        throw ConfigError("lipschitz bound K must be positive");
    }
    return p;
}

RunConfig parse_run_config(const ConfigFile& config) {
    RunConfig rc;
    rc.n_state =
        static_cast<int>(config.get_long("grid", "n_state", rc.n_state));
    rc.basis_degree = static_cast<int>(
        config.get_long("grid", "basis_degree", rc.basis_degree));

    rc.paths = config.get_long("sim", "paths", rc.paths);
    rc.horizon = config.get_double("sim", "horizon", rc.horizon);
    rc.dt = config.get_double("sim", "dt", rc.dt);
    rc.seed = static_cast<std::uint64_t>(
        config.get_long("sim", "seed", static_cast<long>(rc.seed)));
    rc.small_jump_gaussian =
        config.get_bool("sim", "small_jump_gaussian", rc.small_jump_gaussian);

    rc.delta_scale = config.get_double("primal", "delta", rc.delta_scale);

    rc.eps = config.get_double("dual", "eps", rc.eps);
    rc.kappa = config.get_double("dual", "kappa", rc.kappa);
    rc.n_e = static_cast<int>(config.get_long("dual", "n_e", rc.n_e));
    rc.h_step = config.get_double("dual", "h_step", rc.h_step);

    rc.r0 = config.get_double("quad", "r0", rc.r0);
    rc.z_max = config.get_double("quad", "z_max", rc.z_max);
    rc.quad_nodes =
        static_cast<int>(config.get_long("quad", "nodes", rc.quad_nodes));

    rc.threads = static_cast<int>(config.get_long("sim", "threads", rc.threads));

    if (rc.dt <= 0.0) throw ConfigError("sim dt must be positive");
    if (rc.paths < 1) throw ConfigError("sim paths must be >= 1");
    if (rc.n_state < 3) throw ConfigError("grid n_state must be >= 3");
    return rc;
}

// ---------------------------------------------------------------------------
// validate_problem
// ---------------------------------------------------------------------------

namespace {

// Max |phi| and max divided-difference ratio of an affine coefficient over
// a sampled box x control grid. Exact for affine forms.
void sample_affine(const AffineCoeff& coeff, const ControlProblem& p,
                   double& max_abs, double& max_ratio) {
    max_abs = 0.0;
    max_ratio = std::abs(coeff.x_slope);
    const int nx = 41;
    for (int i = 0; i < nx; ++i) {
        const double x =
            p.box.x_min + p.box.width() * i / (nx - 1);
        for (double u : p.controls.points()) {
            max_abs = std::max(max_abs, std::abs(coeff(x, u)));
        }
    }
}

}  // namespace

ValidationReport validate_problem(const ControlProblem& p) {
    ValidationReport report;
    report.problem = p.name;
    const double K = p.cost.lipschitz_bound;

    // (A1): exponential tail moment at m = min(lambda)/2.
    {
        AssumptionCheck check;
        check.name = "A1";
        const double m =
            0.5 * std::min(p.levy.lambda_plus(), p.levy.lambda_minus());
        try {
            check.observed = validate_levy_measure(p.levy, m);
            check.pass = std::isfinite(check.observed);
            check.bound = kInf;
            std::ostringstream detail;
            detail << "exponential tail moment at m=" << m;
            check.detail = detail.str();
        } catch (const ValidationError& err) {
            check.pass = false;
            check.detail = err.what();
        }
        report.checks.push_back(check);
    }

    // (A2): bounds and Lipschitz ratios of b, sigma, h on the box.
    {
        AssumptionCheck check;
        check.name = "A2";
        check.bound = K;
        double worst = 0.0;
        std::ostringstream detail;
        auto consider = [&](const char* label, double max_abs,
                            double max_ratio) {
            worst = std::max({worst, max_abs, max_ratio});
            detail << label << ": |.|0=" << max_abs << " lip=" << max_ratio
                   << "; ";
        };
        double a0 = 0.0, l0 = 0.0;
        sample_affine(p.dynamics.drift, p, a0, l0);
        consider("b", a0, l0);
        sample_affine(p.dynamics.diffusion, p, a0, l0);
        consider("sigma", a0, l0);

        // h is quadratic; its sup and Lipschitz constant on the box are
        // attained at the corners.
        double h_abs = 0.0, h_lip = 0.0;
        for (double x : {p.box.x_min, p.box.x_max, 0.0}) {
            for (double u : {p.controls.points().front(),
                             p.controls.points().back(), 0.0}) {
                h_abs = std::max(h_abs, std::abs(p.cost(x, u)));
                h_lip = std::max(
                    h_lip, std::abs(2.0 * p.cost.q * x + p.cost.lx));
            }
        }
        consider("h", h_abs, h_lip);
        check.observed = worst;
        check.pass = worst <= K;
        check.detail = detail.str();
        report.checks.push_back(check);
    }

    // (A3): |eta(x,u,z)| = |g(x,u)| |z| against K [ |z| 1_{|z|<1} +
    // e^{m|z|} 1_{|z|>=1} ] with m = min(lambda)/2, plus the Lipschitz
    // ratio in x.
    {
        AssumptionCheck check;
        check.name = "A3";
        check.bound = K;
        const double m =
            0.5 * std::min(p.levy.lambda_plus(), p.levy.lambda_minus());
        double worst = 0.0;
        const int nx = 21;
        for (int i = 0; i < nx; ++i) {
            const double x = p.box.x_min + p.box.width() * i / (nx - 1);
            for (double u : p.controls.points()) {
                const double g = p.dynamics.jump_scale(x, u);
                for (double z :
                     {0.01, 0.1, 0.5, 0.99, 1.0, 2.0, 5.0, 10.0, 30.0}) {
                    const double envelope =
                        z < 1.0 ? z : std::exp(m * z);
                    worst = std::max(worst, std::abs(g) * z / envelope);
                    worst = std::max(
                        worst,
                        std::abs(p.dynamics.jump_scale.x_slope) * z / envelope);
                }
            }
        }
        check.observed = worst;
        check.pass = worst <= K;
        std::ostringstream detail;
        detail << "max |eta| / envelope ratio at m=" << m;
        check.detail = detail.str();
        report.checks.push_back(check);
    }

    report.pass = std::all_of(report.checks.begin(), report.checks.end(),
                              [](const AssumptionCheck& c) { return c.pass; });
    return report;
}

std::string ValidationReport::to_json() const {
    nlohmann::json j;
    j["problem"] = problem;
    j["pass"] = pass;
    j["checks"] = nlohmann::json::array();
    for (const auto& check : checks) {
        nlohmann::json c;
        c["name"] = check.name;
        c["pass"] = check.pass;
        c["observed"] = check.observed;
        c["bound"] = std::isfinite(check.bound)
                         ? nlohmann::json(check.bound)
                         : nlohmann::json("inf");
        c["detail"] = check.detail;
        j["checks"].push_back(c);
    }
    return j.dump(2);
}

}  // namespace omlp
