#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "salem2d/errors.hpp"
#include "salem2d/geometry.hpp"

namespace salem2d {

// Smoothness order and quadrature tolerance of the mollifier.
struct BumpSpec {
    int K = 5;                 // the bump is (1-t^2)_+^{K+1} per axis, C^K
    double quad_tol = 1e-10;   // relative tolerance of the transform quadrature
};

// Separable polynomial mollifier phi(x) = c (1-x1^2)_+^{K+1} (1-x2^2)_+^{K+1},
// normalized to integral 1, supported in [-1,1]^2, together with its Fourier
// transform (oscillatory Gauss-Legendre panels, memoized per axis value).
class Bump {
  public:
    explicit Bump(BumpSpec spec = {});

    const BumpSpec& spec() const { return spec_; }
    double axis_norm_const() const { return c1_; }

    double phi1(double t) const;            // 1-D factor, integral 1
    double phi(Vec2 x) const;
    double phi_hat1(double t) const;        // real by even symmetry
    double phi_hat(Vec2 xi) const;

    double phi_eps(double eps, Vec2 x) const;       // eps^{-2} phi(x/eps)
    double periodized(double eps, Vec2 x) const;    // sum of phi_eps over Z^2 translates

    // |phi_hat1(t)| <= envelope_const() * (1+|t|)^{-(K+1)}; the constant is a
    // scan-pinned envelope, cached after first use.
    double envelope_const() const;

    // phi_hat1(eps*n) for |n| <= n_max, for the dense coefficient paths.
    std::vector<double> axis_table(double eps, std::int64_t n_max) const;

  private:
    BumpSpec spec_;
    double c1_ = 0.0;                        // 1-D normalization constant

    double transform_quadrature(double t) const;
};

// Gauss-Legendre nodes/weights on [-1,1]; cached per n, deterministic.
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n);

} // namespace salem2d
