#pragma once

// Problem data: tempered-stable Lévy measures, affine controlled dynamics,
// quadratic running costs, the built-in problem registry, and configuration
// parsing. Everything here is immutable after construction and safe to
// share across threads.

#include "omlp/errors.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace omlp {

// ---------------------------------------------------------------------------
// Lévy measure
// ---------------------------------------------------------------------------

/// Region selector for power moments of a Lévy measure. `small`, `tail`
/// and `all` integrate |z|^p; `signed_tail` integrates z^p over |z| >= 1
/// keeping the sign.
enum class MomentRegion { small, tail, signed_tail, all };

/// One-dimensional tempered alpha-stable jump intensity
///   nu(dz) = C1 e^{-lambda1 z} z^{-1-alpha1} 1_{z>0} dz
///          + C2 e^{-lambda2 |z|} |z|^{-1-alpha2} 1_{z<0} dz.
/// C1 = C2 = 0 encodes the pure-diffusion (no-jump) case.
class LevyMeasure {
public:
    LevyMeasure() = default;
    LevyMeasure(double c_plus, double c_minus, double lambda_plus,
                double lambda_minus, double alpha_plus, double alpha_minus);

    double c_plus() const { return c_plus_; }
    double c_minus() const { return c_minus_; }
    double lambda_plus() const { return lambda_plus_; }
    double lambda_minus() const { return lambda_minus_; }
    double alpha_plus() const { return alpha_plus_; }
    double alpha_minus() const { return alpha_minus_; }

    bool is_null() const { return c_plus_ == 0.0 && c_minus_ == 0.0; }
    bool is_symmetric() const;

    /// int_a^b z^p e^{-lambda z} C z^{-1-alpha} dz for one side of the
    /// measure (positive side uses C1/lambda1/alpha1, negative side the
    /// mirrored parameters). b may be +infinity. Closed form through the
    /// upper incomplete gamma function.
    double side_moment(bool positive_side, double p, double a, double b) const;

    /// Same integral by adaptive quadrature (tanh-sinh near the origin,
    /// exp-sinh on the unbounded tail). Independent oracle for side_moment.
    double side_moment_quadrature(bool positive_side, double p, double a,
                                  double b) const;

    /// Power moment over a region; cutoff is the small/tail split point
    /// (1 by default, r0 for quadrature small-variance checks).
    double moment(int p, MomentRegion region, double cutoff = 1.0) const;

    /// moment() computed entirely by adaptive quadrature.
    double moment_quadrature(int p, MomentRegion region,
                             double cutoff = 1.0) const;

    /// Signed full moment int z^m nu(dz), m >= 2 (odd moments vanish for
    /// symmetric measures). Feeds the exact jump-generator route.
    double signed_moment(int m) const;

    /// int_{|z| >= 1} z nu(dz), sign kept.
    double signed_tail_first_moment() const;

    /// int_{r0 <= |z| < 1} z nu(dz), sign kept; the compensator drift of
    /// the mid-jump band.
    double signed_mid_first_moment(double r0) const;

    /// nu({|z| >= a}).
    double tail_mass(double a) const;

private:
    double c_plus_ = 0.0;
    double c_minus_ = 0.0;
    double lambda_plus_ = 1.0;
    double lambda_minus_ = 1.0;
    double alpha_plus_ = 0.5;
    double alpha_minus_ = 0.5;
};

/// int_{|z| >= 1} e^{m|z|} nu(dz) by adaptive quadrature. Throws
/// ValidationError naming the violated tail when m >= min(lambda1, lambda2)
/// and the corresponding side carries mass.
double validate_levy_measure(const LevyMeasure& nu, double m);

/// Spec-level moment entry point; throws DomainError for non-integrable
/// (p, region) combinations.
double levy_moment(const LevyMeasure& nu, int p, MomentRegion region,
                   double cutoff = 1.0);

// ---------------------------------------------------------------------------
// Dynamics and cost
// ---------------------------------------------------------------------------

/// Affine form a_x x + a_u u + a_0; the coefficient family used by every
/// registry problem.
struct AffineCoeff {
    double x_slope = 0.0;
    double u_slope = 0.0;
    double offset = 0.0;

    double operator()(double x, double u) const {
        return x_slope * x + u_slope * u + offset;
    }
};

/// Controlled coefficients of the state equation
///   dX = b(X,u) dt + sigma(X,u) dW + jump term,  eta(x,u,z) = g(x,u) z.
struct Dynamics {
    AffineCoeff drift;       // b
    AffineCoeff diffusion;   // sigma
    AffineCoeff jump_scale;  // g

    bool is_null() const {
        auto zero = [](const AffineCoeff& c) {
            return c.x_slope == 0.0 && c.u_slope == 0.0 && c.offset == 0.0;
        };
        return zero(drift) && zero(diffusion) && zero(jump_scale);
    }
};

/// Quadratic running cost h(x,u) = q x^2 + lx x + r u^2 + lu u + h0 with
/// discount rate c and the Lipschitz/bound constant K of the standing
/// assumptions.
struct CostModel {
    double q = 1.0;
    double r = 1.0;
    double lx = 0.0;
    double lu = 0.0;
    double h0 = 0.0;
    double discount = 1.0;
    double lipschitz_bound = 64.0;

    double operator()(double x, double u) const {
        return q * x * x + lx * x + r * u * u + lu * u + h0;
    }
};

/// Finite set of admissible control values, sorted strictly increasing.
class ControlGrid {
public:
    ControlGrid() = default;
    explicit ControlGrid(std::vector<double> points);

    /// Uniform grid with n points on [lo, hi].
    static ControlGrid uniform(double lo, double hi, int n);

    const std::vector<double>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    double operator[](std::size_t i) const { return points_[i]; }

private:
    std::vector<double> points_;
};

struct StateBox {
    double x_min = -6.0;
    double x_max = 6.0;

    double width() const { return x_max - x_min; }
    bool contains(double x) const { return x >= x_min && x <= x_max; }
};

/// Full problem instance. Immutable; construction validates the box and
/// the initial state.
struct ControlProblem {
    std::string name;
    Dynamics dynamics;
    CostModel cost;
    LevyMeasure levy;
    ControlGrid controls;
    StateBox box;
    double x0 = 1.0;

    double discount() const { return cost.discount; }
};

// ---------------------------------------------------------------------------
// Run parameters
// ---------------------------------------------------------------------------

/// Numerical knobs shared by the pipeline stages. Defaults are the desk
/// scale documented in the README.
struct RunConfig {
    int n_state = 201;
    int basis_degree = 4;

    long paths = 100000;
    double horizon = -1.0;  // < 0: choose so e^{-cT} < 1e-4
    double dt = 1e-3;
    std::uint64_t seed = 42;
    bool small_jump_gaussian = true;

    double delta_scale = 1e-6;  // primal equality relaxation scale

    double eps = 0.05;          // coefficient shaking radius
    double kappa = 0.05;        // mollifier radius
    int n_e = 3;                // shaking grid resolution
    double h_step = -1.0;       // mollifier lattice step; < 0: kappa / 8

    double r0 = 0.01;           // small-jump cutoff
    double z_max = 30.0;        // jump-size truncation
    int quad_nodes = 64;        // Gauss-Legendre nodes per region per sign
    double tail_tolerance = 1e-10;

    int threads = 0;            // 0: hardware concurrency

    double effective_horizon(double discount) const;
};

// ---------------------------------------------------------------------------
// Configuration files
// ---------------------------------------------------------------------------

/// Minimal TOML-subset reader: [section] headers, key = value lines,
/// numbers / quoted strings / booleans, # comments. Enough for the
/// problem-configuration schema; anything fancier is rejected with a
/// line-numbered error.
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    long get_long(const std::string& section, const std::string& key,
                  long fallback) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    bool get_bool(const std::string& section, const std::string& key,
                  bool fallback) const;

    const std::map<std::string, std::map<std::string, std::string>>& sections()
        const {
        return sections_;
    }

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

/// Registry of built-in problems: "degenerate", "lq", "lq_jump",
/// "lq_jump_asym".
std::vector<std::string> registry_names();
ControlProblem registry_problem(const std::string& name);

/// Build a fully validated problem from a parsed configuration: registry
/// name plus optional per-field overrides. Throws ConfigError with a
/// field-level message on any invariant violation.
ControlProblem build_problem(const ConfigFile& config);

/// Extract the numerical run parameters (grid / sim / primal / dual
/// sections) from the same file.
RunConfig parse_run_config(const ConfigFile& config);

// ---------------------------------------------------------------------------
// Assumption validation
// ---------------------------------------------------------------------------

struct AssumptionCheck {
    std::string name;
    bool pass = false;
    double observed = 0.0;  // max ratio / computed moment
    double bound = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::string problem;
    std::vector<AssumptionCheck> checks;
    bool pass = false;

    std::string to_json() const;
};

/// Samples (x, u, z) over box x controls x jump grid and reports Lipschitz
/// ratios and bound violations against K for assumptions (A1)-(A3).
ValidationReport validate_problem(const ControlProblem& p);

}  // namespace omlp
