#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "salem2d/errors.hpp"
#include "salem2d/geometry.hpp"

namespace salem2d {

// Element of Z[i] with 64-bit signed components and checked arithmetic.
// Exactness is required by every divisor-set consumer, so any overflow is a
// hard arithmetic_overflow rather than silent wraparound.
struct GaussInt {
    std::int64_t re = 0;
    std::int64_t im = 0;

    friend bool operator==(const GaussInt&, const GaussInt&) = default;
};

// Canonical ordering: (sup_norm, re, im). Used everywhere a deterministic
// enumeration order matters.
bool canonical_less(const GaussInt& a, const GaussInt& b);

GaussInt conj(GaussInt z);
GaussInt neg(GaussInt z);
GaussInt add(GaussInt a, GaussInt b);
GaussInt sub(GaussInt a, GaussInt b);
GaussInt mul(GaussInt a, GaussInt b);   // throws arithmetic_overflow

std::int64_t norm(GaussInt z);          // re^2 + im^2, throws arithmetic_overflow
std::int64_t sup_norm(GaussInt z);
double euclid_norm(GaussInt z);
bool is_zero(GaussInt z);
bool is_unit(GaussInt z);

Vec2 to_vec(GaussInt z);
std::string to_string(GaussInt z);      // "a+bi" form, e.g. "2-7i"
std::optional<GaussInt> parse_gauss(const std::string& s);

// Complex product q*x with x real. Exact reinterpretation of Z[i] acting on R^2.
Vec2 mul(GaussInt q, Vec2 x);

// l / q when the quotient lies in Z[i]. q must be nonzero.
std::optional<GaussInt> exact_divide(GaussInt l, GaussInt q);

// Gaussian prime factorization of a nonzero l: canonical prime powers, unit
// folded into `unit`. Prime representatives are canonicalized to the first
// quadrant (re > 0, im >= 0; and re >= im for ramified 1+i).
struct GaussFactor {
    GaussInt prime;
    int exponent = 0;
};
struct GaussFactorization {
    GaussInt unit{1, 0};
    std::vector<GaussFactor> factors;
};
GaussFactorization factorize(GaussInt l);

// All q != 0 with l/q in Z[i], including the four unit multiples of each
// divisor, in canonical order. l must be nonzero; norm(l) must factor within
// the supported range (rational trial division to 1e6, so norm <= 1e12).
std::vector<GaussInt> divisors(GaussInt l);
std::uint64_t divisor_count(GaussInt l);

bool is_gaussian_prime(GaussInt q);

// Deterministic 64-bit Miller-Rabin and two-squares decomposition p = a^2+b^2
// for rational primes p = 1 (mod 4); a >= b >= 1.
bool is_prime_u64(std::uint64_t n);
std::pair<std::int64_t, std::int64_t> two_squares(std::int64_t p);

// gcd in Z[i] up to units (Euclidean algorithm with rounded division).
GaussInt gauss_gcd(GaussInt a, GaussInt b);

enum class AnnulusMode { all, primes, custom };
std::string to_string(AnnulusMode m);
std::optional<AnnulusMode> parse_mode(const std::string& s);

// { q : M/2 < sup_norm(q) <= M }, filtered by mode. Members are sorted
// canonically.
struct Annulus {
    double M = 0.0;
    AnnulusMode mode = AnnulusMode::all;
    std::vector<GaussInt> members;
};
Annulus annulus(double M, AnnulusMode mode,
                const std::vector<GaussInt>& custom = {});

// Smallest-prime-factor sieve; shared by the batch divisor-count scans and
// the dense coefficient tables.
class SpfSieve {
  public:
    explicit SpfSieve(std::uint32_t limit);
    std::uint32_t limit() const { return limit_; }
    // prime-power decomposition of n <= limit
    void factor(std::uint32_t n, std::vector<std::pair<std::uint32_t, int>>& out) const;
    bool is_prime(std::uint32_t n) const;

  private:
    std::uint32_t limit_;
    std::vector<std::uint32_t> spf_;
};

// Batch context: SPF sieve plus memoized two-squares splits, for fast
// divisor enumeration over many small l.
class DivisorScanner {
  public:
    explicit DivisorScanner(std::uint32_t norm_limit);
    std::uint64_t divisor_count(GaussInt l) const;
    GaussFactorization factorize(GaussInt l) const;
    std::vector<GaussInt> divisors(GaussInt l) const;
    const SpfSieve& sieve() const { return sieve_; }
    // precompute every two-squares split up to the sieve limit, so later
    // lookups are read-only and safe to share across workers
    void warm_splits();

  private:
    SpfSieve sieve_;
    mutable std::vector<std::pair<std::int64_t, std::int64_t>> split_memo_;
};

// Empirical divisor-growth statistic: rows are dyadic ranges of sup_norm(l)
// covering [3, L]; the statistic is ln|D(l)| * ln ln|l| / ln|l|.
struct DivisorStatRow {
    std::int64_t lo = 0;       // inclusive
    std::int64_t hi = 0;       // inclusive
    double max_zeta = 0.0;
    GaussInt argmax;
    std::uint64_t count = 0;   // l scanned in the range (full ring, not octant)
};
struct DivisorStatTable {
    std::vector<DivisorStatRow> rows;
    double global_max = 0.0;
    GaussInt global_argmax;
};
DivisorStatTable divisor_bound_stat(std::int64_t L);

// |P(M)| * ln M / M^2 per M; the ratio is the testable surrogate for the
// prime-count lower bound.
struct PrimeCountRow {
    double M = 0.0;
    std::uint64_t count = 0;
    double ratio = 0.0;
};
std::vector<PrimeCountRow> prime_count_stat(const std::vector<double>& Ms);

} // namespace salem2d
