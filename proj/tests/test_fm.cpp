#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <random>

#include "fm_oracle.hpp"
#include "salem2d/fm.hpp"

using namespace salem2d;

TEST_CASE("parameter validation and derived fields") {
    const FMParams p = make_fm_params(4.0, 1.0);
    CHECK(p.a == doctest::Approx(1.0));
    CHECK(p.eps == doctest::Approx(0.125));
    CHECK(p.ann.members.size() == 56);

    CHECK_THROWS_AS(make_fm_params(4.0, 0.0), domain_error);
    CHECK_THROWS_AS(make_fm_params(4.0, -1.5), domain_error);
    CHECK_THROWS_AS(make_fm_params(2.0, 2.0, AnnulusMode::primes), domain_error);
    // K must exceed 2 + a
    CHECK_THROWS_AS(make_fm_params(4.0, 0.05, AnnulusMode::all, BumpSpec{3, 1e-10}), domain_error);
    // custom psi: eps is the minimum over the shell, and must stay below 1/2
    const auto psi = [](GaussInt q) { return 1.0 / (4.0 * double(sup_norm(q))); };
    const FMParams c = make_fm_params(4.0, 1.0, AnnulusMode::all, BumpSpec{}, Vec2{0, 0}, psi);
    CHECK(c.eps == doctest::Approx(1.0 / 16.0));
    const auto psi_big = [](GaussInt) { return 0.7; };
    CHECK_THROWS_AS(make_fm_params(4.0, 1.0, AnnulusMode::all, BumpSpec{}, Vec2{0, 0}, psi_big),
                    domain_error);
}

TEST_CASE("coefficient at zero frequency is exactly one") {
    for (double M : {4.0, 8.0, 16.0})
        for (double tau : {1.0, 2.0}) {
            const FMParams p = make_fm_params(M, tau);
            const auto c = fm_coeff(p, GaussInt{0, 0});
            CHECK(c.real() == 1.0);
            CHECK(c.imag() == 0.0);
        }
}

TEST_CASE("vanishing window: empty divisor intersection and exact zero") {
    for (double M : {8.0, 16.0}) {
        const FMParams p = make_fm_params(M, 2.0);
        const std::int64_t bound = std::int64_t(M / 4.0);
        for (std::int64_t a = -bound; a <= bound; ++a)
            for (std::int64_t b = -bound; b <= bound; ++b) {
                const GaussInt l{a, b};
                if (is_zero(l)) continue;
                CHECK(annulus_coeff_population(p, l).empty());
                const auto c = fm_coeff(p, l);
                CHECK(c.real() == 0.0);
                CHECK(c.imag() == 0.0);
            }
    }
}

TEST_CASE("population is empty up to M/2 and catches constructed divisors") {
    const FMParams p = make_fm_params(8.0, 1.0);
    CHECK(annulus_coeff_population(p, GaussInt{4, 0}).empty());   // sup-norm 4 = M/2
    // l = conj(q) w for an annulus member q
    const GaussInt q{5, -2};
    CHECK(2.0 * double(sup_norm(q)) > p.M);
    const GaussInt l = mul(conj(q), GaussInt{3, 1});
    const auto pop = annulus_coeff_population(p, l);
    CHECK(std::find(pop.begin(), pop.end(), q) != pop.end());
    CHECK_THROWS_AS(annulus_coeff_population(p, GaussInt{0, 0}), domain_error);
}

TEST_CASE("coefficient bound and conjugation symmetry") {
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<std::int64_t> d(-64, 64);
    for (double tau : {1.0, 2.0}) {
        const FMParams p = make_fm_params(8.0, tau);
        for (int i = 0; i < 200; ++i) {
            const GaussInt l{d(rng), d(rng)};
            const auto c = fm_coeff(p, l);
            CHECK(std::abs(c) <= 1.0 + 1e-12);
            const auto cm = fm_coeff(p, neg(l));
            CHECK(cm.real() == doctest::Approx(c.real()).epsilon(1e-13));
            CHECK(cm.imag() == doctest::Approx(-c.imag()).epsilon(1e-13));
        }
    }
    // with a shift the density stays real, so the symmetry persists
    const FMParams g = make_fm_params(4.0, 1.0, AnnulusMode::all, BumpSpec{}, Vec2{0.3, 0.7});
    for (int i = 0; i < 50; ++i) {
        const GaussInt l{d(rng), d(rng)};
        const auto c = fm_coeff(g, l);
        const auto cm = fm_coeff(g, neg(l));
        CHECK(cm.real() == doctest::Approx(c.real()).epsilon(1e-12));
        CHECK(cm.imag() == doctest::Approx(-c.imag()).epsilon(1e-12));
    }
}

TEST_CASE("reindexing identity <k, qx> = <k conj(q), x>") {
    std::mt19937_64 rng(29);
    std::uniform_int_distribution<std::int64_t> di(-50, 50);
    std::uniform_real_distribution<double> dr(-10.0, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const GaussInt k{di(rng), di(rng)};
        const GaussInt q{di(rng), di(rng)};
        const Vec2 x{dr(rng), dr(rng)};
        const double lhs = dot(to_vec(k), mul(q, x));
        const double rhs = dot(to_vec(mul(k, conj(q))), x);
        CHECK(std::fabs(lhs - rhs) <= 1e-12 * std::max(1.0, std::fabs(lhs)));
    }
}

TEST_CASE("generalized path at theta = 0 is bit-identical to the standard path") {
    const FMParams p = make_fm_params(8.0, 2.0);
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<std::int64_t> d(-32, 32);
    for (int i = 0; i < 200; ++i) {
        const GaussInt l{d(rng), d(rng)};
        const auto std_path = fm_coeff(p, l);
        const auto gen_path = detail::fm_coeff_general(p, l);
        CHECK(std::memcmp(&std_path, &gen_path, sizeof(std_path)) == 0);
    }
}

TEST_CASE("point evaluation") {
    const FMParams p = make_fm_params(4.0, 2.0);
    // exact rational point r/q with q in the annulus: the q-term sits at the
    // bump center
    const GaussInt q{3, 1};
    const Vec2 x = mul(conj(q), Vec2{1.0 / 10.0, 0.0});   // = (1,0)/q
    CHECK(fm_eval(p, x) >= p.bump.phi_eps(p.eps, Vec2{0, 0}) / double(p.ann.members.size()) - 1e-12);
    // point evaluation agrees with the direct periodized sum
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> dr(0.0, 1.0);
    bool saw_zero = false;
    for (int i = 0; i < 300; ++i) {
        const Vec2 y{dr(rng), dr(rng)};
        double direct = 0.0;
        for (const GaussInt& m : p.ann.members)
            direct += p.bump.periodized(p.eps, mul(m, y));
        direct /= double(p.ann.members.size());
        const double fast = fm_eval(p, y);
        CHECK(fast == doctest::Approx(direct).epsilon(1e-12));
        CHECK(fast >= 0.0);
        saw_zero = saw_zero || fast == 0.0;
    }
    CHECK(saw_zero);
}

TEST_CASE("coefficients match the point-evaluation quadrature") {
    // small instance of the oracle comparison; the acceptance suite runs the
    // full grid
    const FMParams p = make_fm_params(4.0, 1.0);
    const auto grid = fm_oracle::coefficients(p, 4, 192);
    for (std::int64_t a = -4; a <= 4; ++a)
        for (std::int64_t b = -4; b <= 4; ++b)
            CHECK(std::abs(fm_coeff(p, GaussInt{a, b}) - grid.at(a, b)) < 1e-6);
}

TEST_CASE("shifted coefficients match the quadrature oracle") {
    const FMParams p = make_fm_params(4.0, 1.0, AnnulusMode::all, BumpSpec{}, Vec2{0.3, 0.7});
    const auto grid = fm_oracle::coefficients(p, 4, 192);
    for (std::int64_t a = -4; a <= 4; ++a)
        for (std::int64_t b = -4; b <= 4; ++b)
            CHECK(std::abs(fm_coeff(p, GaussInt{a, b}) - grid.at(a, b)) < 1e-6);
}

TEST_CASE("shell scan") {
    const FMParams p = make_fm_params(16.0, 2.0);
    const auto table = fm_coeff_bound_check(p, 64);
    REQUIRE(table.rows.size() == 6);
    // shells inside the vanishing window stay at zero
    CHECK(table.rows[0].max_ratio == 0.0);
    CHECK(table.rows[1].max_ratio == 0.0);
    CHECK(table.max_ratio > 0.0);
    CHECK(table.max_ratio < 1.0);
    std::uint64_t count = 0;
    for (const auto& r : table.rows) count += r.count;
    // every l with 1 <= sup-norm <= 64 is scanned
    CHECK(count == std::uint64_t((2 * 64 + 1) * (2 * 64 + 1) - 1));
    CHECK_THROWS_AS(fm_coeff_bound_check(p, 1), domain_error);
}

TEST_CASE("prime-mode scan uses the logarithmic weight") {
    const FMParams p = make_fm_params(8.0, 2.0, AnnulusMode::primes);
    const auto table = fm_coeff_bound_check(p, 32);
    CHECK(table.max_ratio > 0.0);
    for (const auto& r : table.rows) {
        if (r.max_ratio == 0.0) continue;
        const double s = double(sup_norm(r.argmax));
        const auto c = fm_coeff(p, r.argmax);
        const double expect = std::abs(c) * std::pow(s, p.a) / std::log(s);
        CHECK(r.max_ratio == doctest::Approx(expect).epsilon(1e-12));
    }
}
