#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <functional>

#include "salem2d/bump.hpp"

using namespace salem2d;

namespace {

// independent 1-D integrator (composite Simpson), used for the oracles
double simpson(double a, double b, int n, const std::function<double(double)>& f) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

} // namespace

TEST_CASE("phi vanishes outside and at the support boundary") {
    const Bump bump{};
    CHECK(bump.phi(Vec2{2.0, 0.0}) == 0.0);
    CHECK(bump.phi(Vec2{1.0, 1.0}) == 0.0);
    CHECK(bump.phi(Vec2{0.0, 0.0}) > 0.0);
    CHECK(bump.phi(Vec2{-0.3, 0.4}) >= 0.0);
}

TEST_CASE("phi integrates to one") {
    const Bump bump{};
    const double ix = simpson(-1.0, 1.0, 2000, [&](double t) { return bump.phi1(t); });
    CHECK(ix == doctest::Approx(1.0).epsilon(1e-12));
    // separability makes the 2-D integral the square of the axis integral
    CHECK(ix * ix == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("transform at zero and separability") {
    const Bump bump{};
    CHECK(bump.phi_hat(Vec2{0.0, 0.0}) == 1.0);
    CHECK(bump.phi_hat1(0.0) == 1.0);
    for (double t : {0.3, 1.7, 9.0}) {
        CHECK(bump.phi_hat(Vec2{t, 0.0}) == doctest::Approx(bump.phi_hat1(t)));
        CHECK(bump.phi_hat1(-t) == bump.phi_hat1(t));
        CHECK(bump.phi_hat(Vec2{t, 2.0}) ==
              doctest::Approx(bump.phi_hat1(t) * bump.phi_hat1(2.0)));
    }
}

TEST_CASE("transform values match the frozen independent quadrature") {
    // frozen from 30-digit adaptive quadrature of
    // 2 c1 int_0^1 (1-u^2)^6 cos(2 pi t u) du
    const Bump bump{};
    CHECK(bump.phi_hat1(0.5) == doctest::Approx(0.714861572539).epsilon(1e-9));
    CHECK(bump.phi_hat1(1.0) == doctest::Approx(0.23624316951).epsilon(1e-9));
    CHECK(bump.phi_hat1(2.0) == doctest::Approx(-0.00292023289322).epsilon(1e-7));
    CHECK(bump.phi_hat1(4.0) == doctest::Approx(-1.61553829011e-5).epsilon(1e-6));
    CHECK(std::fabs(bump.phi_hat1(16.0) - -2.70398608075e-10) < 1e-14);
}

TEST_CASE("transform decay envelope") {
    const Bump bump{};
    const double env = bump.envelope_const();
    const int K = bump.spec().K;
    CHECK(std::fabs(bump.phi_hat(Vec2{100.0, 0.0})) <= env * std::pow(101.0, -double(K + 1)));
    for (double t = 1.0; t <= 1e4; t *= 1.3) {
        const double bound = std::max(env * std::pow(1.0 + t, -double(K + 1)), 2e-15);
        CHECK(std::fabs(bump.phi_hat1(t)) <= bound);
    }
}

TEST_CASE("scaled bump") {
    const Bump bump{};
    CHECK(bump.phi_eps(1.0, Vec2{0.3, -0.2}) == bump.phi(Vec2{0.3, -0.2}));
    CHECK(bump.phi_eps(0.05, Vec2{0.1, 0.0}) == 0.0);
    CHECK_THROWS_AS(bump.phi_eps(0.0, Vec2{0, 0}), domain_error);
    CHECK_THROWS_AS(bump.phi_eps(-1.0, Vec2{0, 0}), domain_error);
    const double eps = 0.01;
    const double ix = simpson(-eps, eps, 4000, [&](double t) {
        return bump.phi1(t / eps) / eps;
    });
    CHECK(ix * ix == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("periodization") {
    const Bump bump{};
    const double eps = 0.25;
    // exact periodicity at dyadic points (lattice shift is exact in floating point)
    CHECK(bump.periodized(eps, Vec2{0.125, -0.375}) ==
          bump.periodized(eps, Vec2{5.125, -9.375}));
    CHECK(bump.periodized(eps, Vec2{3.0, -7.0}) ==
          doctest::Approx(bump.phi_eps(eps, Vec2{0, 0})));
    CHECK(bump.periodized(0.3, Vec2{0.5, 0.5}) == 0.0);
    // cell integral equals one (separable axis factor squared)
    const double ix = simpson(0.0, 1.0, 4000, [&](double x) {
        double acc = 0.0;
        for (int r = -1; r <= 1; ++r) acc += bump.phi1((x - r) / eps) / eps;
        return acc;
    });
    CHECK(ix * ix == doctest::Approx(1.0).epsilon(1e-9));
    // wide scaling sums several translates; compare against the direct sum
    const double wide = 1.75;
    const Vec2 x{0.4, -0.1};
    double direct = 0.0;
    for (int rx = -3; rx <= 3; ++rx)
        for (int ry = -3; ry <= 3; ++ry)
            direct += bump.phi_eps(wide, Vec2{x.x - rx, x.y - ry});
    CHECK(bump.periodized(wide, x) == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("lattice Fourier coefficients of the periodization") {
    const Bump bump{};
    const double eps = 0.3;
    const double tol = 10.0 * bump.spec().quad_tol;
    for (int k = -10; k <= 10; ++k) {
        // 1-D reduction by separability of the periodized product bump
        const auto f_re = [&](double x) {
            double acc = 0.0;
            for (int r = -1; r <= 1; ++r) acc += bump.phi1((x - r) / eps) / eps;
            return acc * std::cos(2.0 * M_PI * k * x);
        };
        const auto f_im = [&](double x) {
            double acc = 0.0;
            for (int r = -1; r <= 1; ++r) acc += bump.phi1((x - r) / eps) / eps;
            return -acc * std::sin(2.0 * M_PI * k * x);
        };
        const double re = simpson(0.0, 1.0, 3000, f_re);
        const double im = simpson(0.0, 1.0, 3000, f_im);
        CHECK(std::fabs(re - bump.phi_hat1(eps * k)) <= tol);
        CHECK(std::fabs(im) <= tol);
    }
    // one non-separable spot check on the full 2-D cell
    {
        const int k1 = 3, k2 = -2;
        const int n = 400;
        std::complex<double> acc{0, 0};
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double x = (i + 0.5) / n, y = (j + 0.5) / n;
                const double ang = -2.0 * M_PI * (k1 * x + k2 * y);
                acc += bump.periodized(eps, Vec2{x, y}) *
                       std::complex<double>{std::cos(ang), std::sin(ang)};
            }
        acc /= double(n) * double(n);
        CHECK(std::abs(acc - bump.phi_hat(Vec2{eps * k1, eps * k2})) < 1e-6);
    }
}

TEST_CASE("memoized transform is consistent") {
    const Bump bump{};
    const double a = bump.phi_hat1(3.7521);
    const double b = bump.phi_hat1(3.7521);
    CHECK(a == b);
    CHECK(bump.phi_hat1(-3.7521) == a);
    const auto table = bump.axis_table(0.125, 16);
    for (int n = 0; n <= 16; ++n) CHECK(table[std::size_t(n)] == bump.phi_hat1(0.125 * n));
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS(Bump(BumpSpec{0, 1e-10}), domain_error);
    CHECK_THROWS_AS(Bump(BumpSpec{25, 1e-10}), domain_error);
    CHECK_THROWS_AS(Bump(BumpSpec{5, 0.0}), domain_error);
    // smoothness order enters the axis normalization
    const Bump k3{BumpSpec{3, 1e-10}};
    const Bump k7{BumpSpec{7, 1e-10}};
    CHECK(k3.axis_norm_const() < k7.axis_norm_const());
}
