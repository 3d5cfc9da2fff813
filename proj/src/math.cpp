#include "omlp/math.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>

namespace omlp {

QuadratureRule gauss_legendre(int n) {
    if (n < 1 || n > 256) {
        throw std::invalid_argument("gauss_legendre: node count out of range");
    }
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));

    // Newton iteration on Legendre polynomials, symmetric pairs done once.
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi initial guess.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return rule;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
    QuadratureRule base = gauss_legendre(n);
    const double mid = 0.5 * (a + b);
    const double len = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        base.nodes[k] = mid + len * base.nodes[k];
        base.weights[k] *= len;
    }
    return base;
}

double upper_incomplete_gamma(double s, double x) {
    if (x < 0.0 || !std::isfinite(x)) {
        throw std::domain_error("upper_incomplete_gamma: x must be >= 0");
    }
    if (x == 0.0) {
        if (s <= 0.0) {
            throw std::domain_error(
                "upper_incomplete_gamma: diverges at x=0 for s <= 0");
        }
        return std::tgamma(s);
    }
    if (s > 0.0) {
        return boost::math::tgamma(s, x);
    }
    // Recurse upward in s; depth is small for the exponents arising from
    // tempered-stable moments (s > -3 in practice).
    const double up = upper_incomplete_gamma(s + 1.0, x);
    return (up - std::pow(x, s) * std::exp(-x)) / s;
}

namespace {

double raw_bump(double y) {
    const double r2 = y * y;
    if (r2 >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - r2));
}

double bump_mass() {
    // int_{-1}^{1} exp(-1/(1-y^2)) dy, computed once. The integrand is
    // smooth and flat at the endpoints, so a fixed high-order rule is exact
    // to machine precision.
    static const double mass = [] {
        const QuadratureRule rule = gauss_legendre(128, -1.0, 1.0);
        KahanSum sum;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            sum.add(rule.weights[i] * raw_bump(rule.nodes[i]));
        }
        return sum.value();
    }();
    return mass;
}

}  // namespace

double bump_kernel(double y) { return raw_bump(y) / bump_mass(); }

double bump_kernel_derivative(double y) {
    const double r2 = y * y;
    if (r2 >= 1.0) return 0.0;
    const double d = 1.0 - r2;
    return raw_bump(y) * (-2.0 * y / (d * d)) / bump_mass();
}

}  // namespace omlp
