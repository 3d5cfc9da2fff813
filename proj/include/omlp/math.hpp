#pragma once

// Small numerical utilities shared by the solver modules: compensated
// summation, Gauss-Legendre rules, and the generalized upper incomplete
// gamma function used by the tempered-stable moment formulas.

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace omlp {

/// Kahan-Neumaier compensated accumulator. Deterministic for a fixed
/// order of additions.
class KahanSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    double value() const { return sum_ + comp_; }

    void reset() { sum_ = comp_ = 0.0; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1], nodes ascending. n in [1, 256].
QuadratureRule gauss_legendre(int n);

/// Same rule mapped onto [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// Upper incomplete gamma Gamma(s, x) = int_x^inf t^{s-1} e^{-t} dt for
/// real s (including s <= 0, which requires x > 0). Uses the downward
/// recurrence Gamma(s,x) = (Gamma(s+1,x) - x^s e^{-x}) / s to reach the
/// s > 0 region handled by Boost.
double upper_incomplete_gamma(double s, double x);

/// Normalized bump kernel phi(y) = N exp(-1/(1-y^2)) on (-1,1), zero
/// outside; N chosen so the kernel has unit mass.
double bump_kernel(double y);

/// First derivative of the normalized bump kernel.
double bump_kernel_derivative(double y);

}  // namespace omlp
