#pragma once

// The partial integro-differential generator applied to polynomial test
// functions and to generic twice-differentiable evaluables: local
// drift/diffusion part, nonlocal jump part (quadrature route and exact
// moment route), the constraint operator c f - (A+J) f, and the nonlinear
// Hamiltonian maximized over the control grid.

#include "omlp/model.hpp"

#include <functional>
#include <vector>

namespace omlp {

// ---------------------------------------------------------------------------
// Polynomial test functions
// ---------------------------------------------------------------------------

/// Dense univariate polynomial with exact derivatives. The LP constraint
/// basis; degree is capped so every required Lévy moment exists.
class TestFunction {
public:
    static constexpr int kMaxDegree = 8;

    TestFunction() : coeffs_{0.0} {}
    explicit TestFunction(std::vector<double> coeffs);

    static TestFunction monomial(int k, double scale = 1.0);
    static TestFunction constant(double value);

    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    const std::vector<double>& coefficients() const { return coeffs_; }

    double operator()(double x) const;
    double derivative(double x) const;
    double second_derivative(double x) const;

    TestFunction differentiate() const;

    TestFunction operator+(const TestFunction& other) const;
    TestFunction operator-(const TestFunction& other) const;
    TestFunction operator*(const TestFunction& other) const;
    TestFunction scaled(double a) const;

private:
    std::vector<double> coeffs_;  // coeffs_[k] multiplies x^k
};

// ---------------------------------------------------------------------------
// Jump quadrature
// ---------------------------------------------------------------------------

/// Discretization of the Lévy measure for the nonlocal operator: the
/// singular band |z| < r0 is folded into a variance (second-order Taylor),
/// the compensated band r0 <= |z| < 1 and the uncompensated tail
/// 1 <= |z| <= z_max carry composite Gauss-Legendre nodes with the
/// density folded into the weights. Nodes are signed.
struct JumpQuadrature {
    double small_cutoff = 0.01;
    double small_variance = 0.0;  // int_{|z|<r0} z^2 nu(dz)
    std::vector<double> mid_nodes;
    std::vector<double> mid_weights;
    std::vector<double> tail_nodes;
    std::vector<double> tail_weights;
    double z_max = 30.0;
    double tail_bound = 0.0;  // nu({|z| > z_max})

    bool empty() const { return mid_nodes.empty() && tail_nodes.empty(); }
};

/// Builds the quadrature; throws ConfigError when the truncated mass
/// beyond z_max exceeds tail_tolerance (suggesting a larger z_max).
JumpQuadrature build_quadrature(const LevyMeasure& nu, double r0, double z_max,
                                int n_nodes, double tail_tolerance = 1e-10);

JumpQuadrature build_quadrature(const LevyMeasure& nu, const RunConfig& rc);

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

/// A^u f(x) = b(x,u) f'(x) + 1/2 sigma(x,u)^2 f''(x). Exact for
/// polynomials.
double apply_local_generator(const TestFunction& f, double x, double u,
                             const Dynamics& dyn);

/// Nonlocal part applied to an arbitrary evaluable with known value and
/// derivatives at x:
///   1/2 g^2 sigma_small^2 * d2phi
///   + sum_mid w [phi(x+gz) - phi(x) - g z dphi]
///   + sum_tail w [phi(x+gz) - phi(x)].
double apply_jump_to_evaluable(const std::function<double(double)>& phi,
                               double phi_x, double dphi_x, double d2phi_x,
                               double x, double g, const JumpQuadrature& quad);

/// J^u f(x) for a polynomial via the quadrature route.
double apply_jump_generator(const TestFunction& f, double x, double u,
                            const Dynamics& dyn, const JumpQuadrature& quad);

/// c f(x) - A^u f(x) - J^u f(x).
double apply_constraint_operator(const TestFunction& f, double x, double u,
                                 const ControlProblem& p,
                                 const JumpQuadrature& quad);

/// Exact moment route: J^u f as a polynomial in x for fixed control,
///   J^u f = f' g mu1_tail + sum_{m>=2} f^(m) g^m / m! * mu_m,
/// where mu_m are signed full moments and mu1_tail the signed tail first
/// moment. Exact for polynomial f and affine g; the independent cross-check
/// of the quadrature route.
TestFunction jump_generator_polynomial(const TestFunction& f, double u,
                                       const Dynamics& dyn,
                                       const LevyMeasure& nu);

/// Exact moment route for the full constraint operator at fixed control:
/// c f - b f' - 1/2 sigma^2 f'' - J^u f as a polynomial in x.
TestFunction constraint_polynomial(const TestFunction& f, double u,
                                   const ControlProblem& p);

// ---------------------------------------------------------------------------
// Hamiltonian
// ---------------------------------------------------------------------------

/// Evaluation point of the nonlinear Hamiltonian: candidate value r,
/// gradient p, second derivative X, and the function fed to the nonlocal
/// operator.
struct SecondOrderState {
    double x = 0.0;
    double r = 0.0;
    double p = 0.0;
    double X = 0.0;
    std::function<double(double)> nonlocal_fn;
};

struct HamiltonianValue {
    double value = 0.0;
    std::size_t argmax_control = 0;
};

/// H(x,r,p,X,phi) = max_u { c r - h(x,u) - b(x,u) p - 1/2 sigma^2 X
///                          - J^u phi(x) } over the finite control grid,
/// together with the maximizing control index.
HamiltonianValue hamiltonian(const SecondOrderState& s,
                             const ControlProblem& p,
                             const JumpQuadrature& quad);

/// Quadrature diagnostics (node counts, moment agreement, tail bound) as a
/// JSON string.
std::string quadrature_diagnostics(const JumpQuadrature& quad,
                                   const LevyMeasure& nu);

}  // namespace omlp
