#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "salem2d/gauss.hpp"

using namespace salem2d;

namespace {

// Independent divisor oracle: scan every candidate in the norm disc and keep
// the exact quotients. Never touches the factorization path.
std::vector<GaussInt> divisors_brute(GaussInt l) {
    const std::int64_t n = norm(l);
    const std::int64_t box = std::int64_t(std::sqrt(double(n))) + 1;
    std::vector<GaussInt> out;
    for (std::int64_t a = -box; a <= box; ++a)
        for (std::int64_t b = -box; b <= box; ++b) {
            const GaussInt q{a, b};
            if (is_zero(q) || norm(q) > n) continue;
            if (exact_divide(l, q)) out.push_back(q);
        }
    std::sort(out.begin(), out.end(), canonical_less);
    return out;
}

std::set<std::pair<std::int64_t, std::int64_t>> as_set(const std::vector<GaussInt>& v) {
    std::set<std::pair<std::int64_t, std::int64_t>> s;
    for (const GaussInt& z : v) s.insert({z.re, z.im});
    return s;
}

} // namespace

TEST_CASE("multiplication matches the complex product") {
    CHECK(mul(GaussInt{1, 1}, GaussInt{1, -1}) == GaussInt{2, 0});
    CHECK(mul(GaussInt{0, 1}, GaussInt{0, 1}) == GaussInt{-1, 0});
    CHECK(mul(GaussInt{2, 1}, GaussInt{1, 3}) == GaussInt{-1, 7});
    CHECK(norm(mul(GaussInt{3, -4}, GaussInt{12, 5})) == norm(GaussInt{3, -4}) * norm(GaussInt{12, 5}));
}

TEST_CASE("multiplication overflow is rejected") {
    const GaussInt big{std::int64_t(1) << 62, 0};
    CHECK_THROWS_AS(mul(big, big), arithmetic_overflow);
    CHECK_THROWS_AS(norm(GaussInt{std::int64_t(1) << 32, std::int64_t(1) << 32}),
                    arithmetic_overflow);
}

TEST_CASE("norm identities") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::int64_t> d(-1000, 1000);
    for (int i = 0; i < 200; ++i) {
        const GaussInt z{d(rng), d(rng)};
        CHECK(conj(conj(z)) == z);
        CHECK(norm(z) >= 0);
        CHECK((norm(z) == 0) == is_zero(z));
        const double s = double(sup_norm(z));
        const double e = euclid_norm(z);
        CHECK(s <= e + 1e-9);
        CHECK(e <= std::sqrt(2.0) * s + 1e-9);
    }
}

TEST_CASE("exact division") {
    CHECK(*exact_divide(GaussInt{2, 0}, GaussInt{1, 1}) == GaussInt{1, -1});
    CHECK(!exact_divide(GaussInt{1, 0}, GaussInt{2, 0}));
    CHECK(*exact_divide(GaussInt{-1, 7}, GaussInt{2, 1}) == GaussInt{1, 3});
    CHECK_THROWS_AS(exact_divide(GaussInt{1, 0}, GaussInt{0, 0}), domain_error);
}

TEST_CASE("divisor sets at the pinned examples") {
    const auto d1 = divisors(GaussInt{1, 0});
    CHECK(d1.size() == 4);
    CHECK(as_set(d1) == as_set({{1, 0}, {-1, 0}, {0, 1}, {0, -1}}));
    CHECK(divisors(GaussInt{1, 1}).size() == 8);
    CHECK(divisors(GaussInt{2, 0}).size() == 12);
    CHECK_THROWS_AS(divisors(GaussInt{0, 0}), domain_error);
    CHECK_THROWS_AS(divisor_count(GaussInt{0, 0}), domain_error);
}

TEST_CASE("divisors agree with the disc-scan oracle on small norms") {
    for (std::int64_t a = -7; a <= 7; ++a) {
        for (std::int64_t b = -7; b <= 7; ++b) {
            const GaussInt l{a, b};
            if (is_zero(l) || norm(l) > 50) continue;
            const auto fast = divisors(l);
            const auto brute = divisors_brute(l);
            CHECK(as_set(fast) == as_set(brute));
            CHECK(divisor_count(l) == fast.size());
        }
    }
    // a few bigger spot checks across the factorization branches
    for (const GaussInt l : {GaussInt{30, 0}, GaussInt{13, 84}, GaussInt{0, 49}, GaussInt{17, 17}}) {
        CHECK(as_set(divisors(l)) == as_set(divisors_brute(l)));
    }
}

TEST_CASE("divisor properties") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::int64_t> d(-40, 40);
    for (int i = 0; i < 60; ++i) {
        const GaussInt l{d(rng), d(rng)};
        if (is_zero(l)) continue;
        const auto divs = divisors(l);
        CHECK(divs.size() % 4 == 0);
        for (const GaussInt& q : divs) {
            auto w = exact_divide(l, q);
            REQUIRE(w.has_value());
            CHECK(mul(q, *w) == l);
        }
    }
}

TEST_CASE("conjugate divisibility identity") {
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<std::int64_t> d(-50, 50);
    for (int i = 0; i < 500; ++i) {
        const GaussInt l{d(rng), d(rng)};
        const GaussInt q{d(rng), d(rng)};
        if (is_zero(q)) continue;
        CHECK(exact_divide(l, conj(q)).has_value() == exact_divide(conj(l), q).has_value());
    }
}

TEST_CASE("gaussian primality at the pinned examples") {
    CHECK(is_gaussian_prime(GaussInt{1, 1}));
    CHECK(is_gaussian_prime(GaussInt{3, 0}));
    CHECK(is_gaussian_prime(GaussInt{0, -7}));
    CHECK(!is_gaussian_prime(GaussInt{2, 0}));
    CHECK(!is_gaussian_prime(GaussInt{1, 0}));
    CHECK(!is_gaussian_prime(GaussInt{0, 0}));
    CHECK(!is_gaussian_prime(GaussInt{5, 0}));   // 5 splits
    CHECK(is_gaussian_prime(GaussInt{2, 1}));
}

TEST_CASE("primality equals the eight-divisor characterization") {
    for (std::int64_t a = 0; a <= 50; ++a) {
        for (std::int64_t b = 0; b <= a; ++b) {
            const GaussInt q{a, b};
            if (is_zero(q) || norm(q) > 5000) continue;
            const bool oracle = !is_unit(q) && divisors_brute(q).size() == 8;
            CHECK(is_gaussian_prime(q) == oracle);
        }
    }
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<std::int64_t> d(-100, 100);
    int tested = 0;
    while (tested < 200) {
        const GaussInt q{d(rng), d(rng)};
        if (is_zero(q) || norm(q) > 10000) continue;
        const bool oracle = !is_unit(q) && divisors_brute(q).size() == 8;
        CHECK(is_gaussian_prime(q) == oracle);
        ++tested;
    }
}

TEST_CASE("two-squares decomposition") {
    CHECK(two_squares(2) == std::pair<std::int64_t, std::int64_t>{1, 1});
    for (std::int64_t p = 5; p <= 10000; p += 4) {
        if (!is_prime_u64(std::uint64_t(p))) continue;
        const auto [a, b] = two_squares(p);
        CHECK(a * a + b * b == p);
        CHECK(a >= b);
        CHECK(b >= 1);
    }
    CHECK_THROWS_AS(two_squares(7), domain_error);
}

TEST_CASE("annulus counts and membership") {
    CHECK(annulus(4, AnnulusMode::all).members.size() == 56);
    CHECK(annulus(2, AnnulusMode::all).members.size() == 16);
    // closed-form box difference at integer M
    std::mt19937_64 rng(19);
    std::uniform_int_distribution<std::int64_t> d(2, 60);
    for (int i = 0; i < 12; ++i) {
        const std::int64_t M = d(rng);
        const std::int64_t expected =
            (2 * M + 1) * (2 * M + 1) - (2 * (M / 2) + 1) * (2 * (M / 2) + 1);
        CHECK(std::int64_t(annulus(double(M), AnnulusMode::all).members.size()) == expected);
    }
    for (const Annulus& ann : {annulus(4, AnnulusMode::all), annulus(9, AnnulusMode::all)}) {
        for (const GaussInt& q : ann.members) {
            CHECK(2.0 * double(sup_norm(q)) > ann.M);
            CHECK(double(sup_norm(q)) <= ann.M);
        }
    }
    CHECK_THROWS_AS(annulus(1.5, AnnulusMode::all), domain_error);
    CHECK_THROWS_AS(annulus(3, AnnulusMode::primes), domain_error);
}

TEST_CASE("prime annulus equals the box sieve") {
    for (double M : {4.0, 7.0, 12.0}) {
        const auto got = as_set(annulus(M, AnnulusMode::primes).members);
        std::set<std::pair<std::int64_t, std::int64_t>> expected;
        const std::int64_t hi = std::int64_t(M);
        for (std::int64_t a = -hi; a <= hi; ++a)
            for (std::int64_t b = -hi; b <= hi; ++b) {
                const GaussInt q{a, b};
                const std::int64_t s = sup_norm(q);
                if (2.0 * double(s) > M && double(s) <= M && is_gaussian_prime(q))
                    expected.insert({a, b});
            }
        CHECK(got == expected);
    }
}

TEST_CASE("custom annulus filters the provided set") {
    const std::vector<GaussInt> custom{{3, 0}, {4, 1}, {1, 0}, {9, 9}};
    const auto ann = annulus(4, AnnulusMode::custom, custom);
    CHECK(as_set(ann.members) == as_set({{3, 0}, {4, 1}}));
}

TEST_CASE("divisor-growth statistic") {
    CHECK_THROWS_AS(divisor_bound_stat(2), domain_error);
    const auto t3 = divisor_bound_stat(3);
    REQUIRE(t3.rows.size() == 1);
    // brute-force the expected maximum over sup-norm 3
    double expected = 0.0;
    for (std::int64_t b = 0; b <= 3; ++b) {
        const double z = std::log(double(divisors_brute(GaussInt{3, b}).size())) *
                         std::log(std::log(3.0)) / std::log(3.0);
        expected = std::max(expected, z);
    }
    CHECK(t3.global_max == doctest::Approx(expected).epsilon(1e-12));

    const auto t = divisor_bound_stat(256);
    CHECK(t.global_max <= 2.5);
    // dyadic ranges tile [3, 256]
    std::int64_t lo = 3;
    for (const auto& row : t.rows) {
        CHECK(row.lo == lo);
        lo = row.hi + 1;
    }
    CHECK(lo == 257);
}

TEST_CASE("prime counting statistic") {
    CHECK_THROWS_AS(prime_count_stat({2.0}), domain_error);
    const auto rows = prime_count_stat({4.0, 32.0, 64.0});
    // exact count at M = 4 against the sieve
    CHECK(rows[0].count == annulus(4, AnnulusMode::primes).members.size());
    CHECK(rows[0].ratio == doctest::Approx(double(rows[0].count) * std::log(4.0) / 16.0));
    // stability between consecutive doublings
    CHECK(rows[2].ratio <= 2.0 * rows[1].ratio);
    CHECK(rows[2].ratio >= 0.5 * rows[1].ratio);
}

TEST_CASE("string round trip") {
    for (const GaussInt z : {GaussInt{2, -7}, GaussInt{0, 1}, GaussInt{-3, 0}}) {
        auto parsed = parse_gauss(to_string(z));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == z);
    }
    CHECK(*parse_gauss("4,-2") == GaussInt{4, -2});
    CHECK(!parse_gauss("abc").has_value());
}
