#include "omlp/generator.hpp"

#include "omlp/math.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace omlp {

// ---------------------------------------------------------------------------
// TestFunction
// ---------------------------------------------------------------------------

TestFunction::TestFunction(std::vector<double> coeffs)
    : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) coeffs_ = {0.0};
    while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
    if (degree() > kMaxDegree) {
        throw DomainError("test function degree exceeds supported maximum");
    }
}

TestFunction TestFunction::monomial(int k, double scale) {
    if (k < 0 || k > kMaxDegree) {
        throw DomainError("monomial degree out of range");
    }
    std::vector<double> coeffs(static_cast<std::size_t>(k) + 1, 0.0);
    coeffs.back() = scale;
    return TestFunction(std::move(coeffs));
}

TestFunction TestFunction::constant(double value) {
    return TestFunction({value});
}

double TestFunction::operator()(double x) const {
    double acc = 0.0;
    for (std::size_t i = coeffs_.size(); i-- > 0;) {
        acc = acc * x + coeffs_[i];
    }
    return acc;
}

double TestFunction::derivative(double x) const {
    double acc = 0.0;
    for (std::size_t i = coeffs_.size(); i-- > 1;) {
        acc = acc * x + coeffs_[i] * static_cast<double>(i);
    }
    return acc;
}

double TestFunction::second_derivative(double x) const {
    double acc = 0.0;
    for (std::size_t i = coeffs_.size(); i-- > 2;) {
        acc = acc * x + coeffs_[i] * static_cast<double>(i * (i - 1));
    }
    return acc;
}

TestFunction TestFunction::differentiate() const {
    if (coeffs_.size() <= 1) return TestFunction::constant(0.0);
    std::vector<double> out(coeffs_.size() - 1);
    for (std::size_t i = 1; i < coeffs_.size(); ++i) {
        out[i - 1] = coeffs_[i] * static_cast<double>(i);
    }
    return TestFunction(std::move(out));
}

TestFunction TestFunction::operator+(const TestFunction& other) const {
    std::vector<double> out(std::max(coeffs_.size(), other.coeffs_.size()),
                            0.0);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) out[i] += coeffs_[i];
    for (std::size_t i = 0; i < other.coeffs_.size(); ++i) {
        out[i] += other.coeffs_[i];
    }
    return TestFunction(std::move(out));
}

TestFunction TestFunction::operator-(const TestFunction& other) const {
    return *this + other.scaled(-1.0);
}

TestFunction TestFunction::operator*(const TestFunction& other) const {
    std::vector<double> out(coeffs_.size() + other.coeffs_.size() - 1, 0.0);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        if (coeffs_[i] == 0.0) continue;
        for (std::size_t j = 0; j < other.coeffs_.size(); ++j) {
            out[i + j] += coeffs_[i] * other.coeffs_[j];
        }
    }
    return TestFunction(std::move(out));
}

TestFunction TestFunction::scaled(double a) const {
    std::vector<double> out = coeffs_;
    for (double& c : out) c *= a;
    return TestFunction(std::move(out));
}

// ---------------------------------------------------------------------------
// Jump quadrature
// ---------------------------------------------------------------------------

namespace {

// Composite Gauss-Legendre on [a, b] split into geometric panels; the
// integrands carry the |z|^{-1-alpha} density factor, so panels cluster
// toward a.
void append_side_panels(const LevyMeasure& nu, bool positive, double a,
                        double b, int n_nodes, std::vector<double>& nodes,
                        std::vector<double>& weights) {
    const double c = positive ? nu.c_plus() : nu.c_minus();
    const double lambda = positive ? nu.lambda_plus() : nu.lambda_minus();
    const double alpha = positive ? nu.alpha_plus() : nu.alpha_minus();
    if (c == 0.0) return;

    const int panels = 4;
    const int per_panel = std::max(2, n_nodes / panels);
    const double ratio = std::pow(b / a, 1.0 / panels);
    double lo = a;
    for (int k = 0; k < panels; ++k) {
        const double hi = (k + 1 == panels) ? b : lo * ratio;
        const QuadratureRule rule = gauss_legendre(per_panel, lo, hi);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double z = rule.nodes[i];
            const double density =
                c * std::exp(-lambda * z) * std::pow(z, -1.0 - alpha);
            nodes.push_back(positive ? z : -z);
            weights.push_back(rule.weights[i] * density);
        }
        lo = hi;
    }
}

}  // namespace

JumpQuadrature build_quadrature(const LevyMeasure& nu, double r0, double z_max,
                                int n_nodes, double tail_tolerance) {
    if (!(r0 > 0.0 && r0 < 1.0)) {
        throw ConfigError("quadrature: r0 must lie in (0, 1)");
    }
    if (!(z_max > 1.0)) {
        throw ConfigError("quadrature: z_max must exceed 1");
    }
    if (n_nodes < 8) {
        throw ConfigError("quadrature: need at least 8 nodes per region");
    }

    JumpQuadrature quad;
    quad.small_cutoff = r0;
    quad.z_max = z_max;
    if (nu.is_null()) return quad;

    quad.small_variance = nu.moment(2, MomentRegion::small, r0);
    quad.tail_bound = nu.tail_mass(z_max);
    if (quad.tail_bound > tail_tolerance) {
        throw ConfigError(
            "quadrature: truncated jump mass beyond z_max exceeds tolerance; "
            "increase z_max");
    }

    for (bool positive : {true, false}) {
        append_side_panels(nu, positive, r0, 1.0, n_nodes, quad.mid_nodes,
                           quad.mid_weights);
        append_side_panels(nu, positive, 1.0, z_max, n_nodes, quad.tail_nodes,
                           quad.tail_weights);
    }
    return quad;
}

JumpQuadrature build_quadrature(const LevyMeasure& nu, const RunConfig& rc) {
    return build_quadrature(nu, rc.r0, rc.z_max, rc.quad_nodes,
                            rc.tail_tolerance);
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

double apply_local_generator(const TestFunction& f, double x, double u,
                             const Dynamics& dyn) {
    const double b = dyn.drift(x, u);
    const double sigma = dyn.diffusion(x, u);
    return b * f.derivative(x) + 0.5 * sigma * sigma * f.second_derivative(x);
}

double apply_jump_to_evaluable(const std::function<double(double)>& phi,
                               double phi_x, double dphi_x, double d2phi_x,
                               double x, double g, const JumpQuadrature& quad) {
    if (quad.empty() || g == 0.0) {
        return quad.empty() ? 0.0
                            : 0.5 * g * g * quad.small_variance * d2phi_x;
    }
    double total = 0.5 * g * g * quad.small_variance * d2phi_x;
    KahanSum mid;
    for (std::size_t i = 0; i < quad.mid_nodes.size(); ++i) {
        const double gz = g * quad.mid_nodes[i];
        mid.add(quad.mid_weights[i] * (phi(x + gz) - phi_x - gz * dphi_x));
    }
    KahanSum tail;
    for (std::size_t i = 0; i < quad.tail_nodes.size(); ++i) {
        const double gz = g * quad.tail_nodes[i];
        tail.add(quad.tail_weights[i] * (phi(x + gz) - phi_x));
    }
    return total + mid.value() + tail.value();
}

double apply_jump_generator(const TestFunction& f, double x, double u,
                            const Dynamics& dyn, const JumpQuadrature& quad) {
    const double g = dyn.jump_scale(x, u);
    return apply_jump_to_evaluable([&](double y) { return f(y); }, f(x),
                                   f.derivative(x), f.second_derivative(x), x,
                                   g, quad);
}

double apply_constraint_operator(const TestFunction& f, double x, double u,
                                 const ControlProblem& p,
                                 const JumpQuadrature& quad) {
    return p.cost.discount * f(x) - apply_local_generator(f, x, u, p.dynamics) -
           apply_jump_generator(f, x, u, p.dynamics, quad);
}

TestFunction jump_generator_polynomial(const TestFunction& f, double u,
                                       const Dynamics& dyn,
                                       const LevyMeasure& nu) {
    if (nu.is_null()) return TestFunction::constant(0.0);

    // g(x, u) as a polynomial in x for fixed u.
    const TestFunction g({dyn.jump_scale.offset + dyn.jump_scale.u_slope * u,
                          dyn.jump_scale.x_slope});

    TestFunction result =
        f.differentiate() * g.scaled(nu.signed_tail_first_moment());

    TestFunction deriv = f.differentiate();
    TestFunction g_power = g;
    double factorial = 1.0;
    for (int m = 2; m <= f.degree(); ++m) {
        deriv = deriv.differentiate();
        g_power = g_power * g;
        factorial *= m;
        result = result +
                 (deriv * g_power).scaled(nu.signed_moment(m) / factorial);
    }
    return result;
}

TestFunction constraint_polynomial(const TestFunction& f, double u,
                                   const ControlProblem& p) {
    const Dynamics& dyn = p.dynamics;
    const TestFunction b(
        {dyn.drift.offset + dyn.drift.u_slope * u, dyn.drift.x_slope});
    const TestFunction sigma({dyn.diffusion.offset + dyn.diffusion.u_slope * u,
                              dyn.diffusion.x_slope});

    TestFunction result = f.scaled(p.cost.discount);
    result = result - b * f.differentiate();
    result = result -
             (sigma * sigma * f.differentiate().differentiate()).scaled(0.5);
    result = result - jump_generator_polynomial(f, u, dyn, p.levy);
    return result;
}

HamiltonianValue hamiltonian(const SecondOrderState& s, const ControlProblem& p,
                             const JumpQuadrature& quad) {
    if (p.controls.size() == 0) {
        throw DomainError("hamiltonian: empty control grid");
    }
    HamiltonianValue best;
    best.value = -std::numeric_limits<double>::infinity();
    const double phi_x = s.nonlocal_fn ? s.nonlocal_fn(s.x) : 0.0;
    for (std::size_t j = 0; j < p.controls.size(); ++j) {
        const double u = p.controls[j];
        const double b = p.dynamics.drift(s.x, u);
        const double sigma = p.dynamics.diffusion(s.x, u);
        const double g = p.dynamics.jump_scale(s.x, u);
        double jump = 0.0;
        if (!quad.empty() && s.nonlocal_fn) {
            jump = apply_jump_to_evaluable(s.nonlocal_fn, phi_x, s.p, s.X, s.x,
                                           g, quad);
        }
        const double bracket = p.cost.discount * s.r - p.cost(s.x, u) -
                               b * s.p - 0.5 * sigma * sigma * s.X - jump;
        if (bracket > best.value) {
            best.value = bracket;
            best.argmax_control = j;
        }
    }
    return best;
}

std::string quadrature_diagnostics(const JumpQuadrature& quad,
                                   const LevyMeasure& nu) {
    nlohmann::json j;
    j["small_cutoff"] = quad.small_cutoff;
    j["small_variance"] = quad.small_variance;
    j["mid_nodes"] = quad.mid_nodes.size();
    j["tail_nodes"] = quad.tail_nodes.size();
    j["z_max"] = quad.z_max;
    j["tail_bound"] = quad.tail_bound;

    // Agreement of the discretized second moment with the closed form.
    double second = quad.small_variance;
    for (std::size_t i = 0; i < quad.mid_nodes.size(); ++i) {
        second += quad.mid_weights[i] * quad.mid_nodes[i] * quad.mid_nodes[i];
    }
    for (std::size_t i = 0; i < quad.tail_nodes.size(); ++i) {
        second +=
            quad.tail_weights[i] * quad.tail_nodes[i] * quad.tail_nodes[i];
    }
    j["second_moment_quadrature"] = second;
    j["second_moment_closed_form"] =
        nu.is_null() ? 0.0 : nu.moment(2, MomentRegion::all);
    return j.dump(2);
}

}  // namespace omlp
