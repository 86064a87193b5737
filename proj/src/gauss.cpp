#include "salem2d/gauss.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <numeric>

namespace salem2d {

namespace {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r))
        throw arithmetic_overflow("gauss: integer addition overflow");
    return r;
}

std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_sub_overflow(a, b, &r))
        throw arithmetic_overflow("gauss: integer subtraction overflow");
    return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r))
        throw arithmetic_overflow("gauss: integer multiplication overflow");
    return r;
}

std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

std::uint64_t powmod_u64(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    std::uint64_t r = 1 % m;
    base %= m;
    while (exp) {
        if (exp & 1) r = mulmod_u64(r, base, m);
        base = mulmod_u64(base, base, m);
        exp >>= 1;
    }
    return r;
}

// First-quadrant canonical representative of the associate class
// (re > 0, im >= 0 picks exactly one of the four associates).
GaussInt canonical_associate(GaussInt p) {
    for (int k = 0; k < 4; ++k) {
        if (p.re > 0 && p.im >= 0) break;
        p = GaussInt{-p.im, p.re};   // multiply by i
    }
    return p;
}

GaussInt must_divide(GaussInt l, GaussInt q) {
    auto d = exact_divide(l, q);
    if (!d) throw numeric_error("factorize: internal exact division failed");
    return *d;
}

} // namespace

bool canonical_less(const GaussInt& a, const GaussInt& b) {
    const auto sa = sup_norm(a), sb = sup_norm(b);
    if (sa != sb) return sa < sb;
    if (a.re != b.re) return a.re < b.re;
    return a.im < b.im;
}

GaussInt conj(GaussInt z) { return {z.re, -z.im}; }
GaussInt neg(GaussInt z) { return {-z.re, -z.im}; }
GaussInt add(GaussInt a, GaussInt b) { return {checked_add(a.re, b.re), checked_add(a.im, b.im)}; }
GaussInt sub(GaussInt a, GaussInt b) { return {checked_sub(a.re, b.re), checked_sub(a.im, b.im)}; }

GaussInt mul(GaussInt a, GaussInt b) {
    const std::int64_t re = checked_sub(checked_mul(a.re, b.re), checked_mul(a.im, b.im));
    const std::int64_t im = checked_add(checked_mul(a.re, b.im), checked_mul(a.im, b.re));
    return {re, im};
}

std::int64_t norm(GaussInt z) {
    return checked_add(checked_mul(z.re, z.re), checked_mul(z.im, z.im));
}

std::int64_t sup_norm(GaussInt z) {
    const std::int64_t ar = z.re < 0 ? -z.re : z.re;
    const std::int64_t ai = z.im < 0 ? -z.im : z.im;
    return ar > ai ? ar : ai;
}

double euclid_norm(GaussInt z) { return std::hypot(double(z.re), double(z.im)); }
bool is_zero(GaussInt z) { return z.re == 0 && z.im == 0; }
bool is_unit(GaussInt z) { return (z.re == 0 || z.im == 0) && sup_norm(z) == 1; }

Vec2 to_vec(GaussInt z) { return {double(z.re), double(z.im)}; }

std::string to_string(GaussInt z) {
    std::string s = std::to_string(z.re);
    s += (z.im < 0) ? "-" : "+";
    s += std::to_string(z.im < 0 ? -z.im : z.im);
    s += "i";
    return s;
}

std::optional<GaussInt> parse_gauss(const std::string& s) {
    // accepts "a+bi" / "a-bi" / "a,b"
    const char* b = s.data();
    const char* e = s.data() + s.size();
    GaussInt z;
    auto r1 = std::from_chars(b, e, z.re);
    if (r1.ec != std::errc{}) return std::nullopt;
    const char* p = r1.ptr;
    if (p == e) { z.im = 0; return z; }
    if (*p == ',') ++p;
    bool negative = false;
    if (p != e && (*p == '+' || *p == '-')) {
        negative = *p == '-';
        if (p + 2 == e && p[1] == 'i') {   // "a+i" / "a-i"
            z.im = negative ? -1 : 1;
            return z;
        }
        if (*p == '+') ++p;   // from_chars rejects a leading plus
    }
    auto r2 = std::from_chars(p, e, z.im);
    if (r2.ec != std::errc{}) return std::nullopt;
    p = r2.ptr;
    if (p != e && *p == 'i') ++p;
    if (p != e) return std::nullopt;
    return z;
}

Vec2 mul(GaussInt q, Vec2 x) {
    return {double(q.re) * x.x - double(q.im) * x.y,
            double(q.re) * x.y + double(q.im) * x.x};
}

std::optional<GaussInt> exact_divide(GaussInt l, GaussInt q) {
    if (is_zero(q)) throw domain_error("exact_divide: q = 0");
    // l / q = l * conj(q) / norm(q); exact via 128-bit intermediates.
    const __int128 nq = (__int128)q.re * q.re + (__int128)q.im * q.im;
    const __int128 re = (__int128)l.re * q.re + (__int128)l.im * q.im;
    const __int128 im = (__int128)l.im * q.re - (__int128)l.re * q.im;
    if (re % nq != 0 || im % nq != 0) return std::nullopt;
    const __int128 wr = re / nq, wi = im / nq;
    constexpr __int128 lim = (__int128)INT64_MAX;
    if (wr > lim || wr < -lim || wi > lim || wi < -lim)
        throw arithmetic_overflow("exact_divide: quotient out of range");
    return GaussInt{std::int64_t(wr), std::int64_t(wi)};
}

bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        std::uint64_t x = powmod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) { witness = false; break; }
        }
        if (witness) return false;
    }
    return true;
}

GaussInt gauss_gcd(GaussInt a, GaussInt b) {
    // Euclidean steps with componentwise-rounded quotients. Norm strictly
    // decreases, so this terminates.
    while (!is_zero(b)) {
        const __int128 nb = (__int128)b.re * b.re + (__int128)b.im * b.im;
        const __int128 re = (__int128)a.re * b.re + (__int128)a.im * b.im;
        const __int128 im = (__int128)a.im * b.re - (__int128)a.re * b.im;
        auto round_div = [](__int128 num, __int128 den) -> std::int64_t {
            __int128 q = num / den;
            __int128 r = num - q * den;
            if (2 * (r < 0 ? -r : r) > den) q += (num < 0) == (den < 0) ? 1 : -1;
            return std::int64_t(q);
        };
        GaussInt q{round_div(re, nb), round_div(im, nb)};
        GaussInt r = sub(a, mul(b, q));
        a = b;
        b = r;
    }
    return a;
}

std::pair<std::int64_t, std::int64_t> two_squares(std::int64_t p) {
    if (p == 2) return {1, 1};
    if (p % 4 != 1 || !is_prime_u64(std::uint64_t(p)))
        throw domain_error("two_squares: argument must be 2 or a prime = 1 (mod 4)");
    // square root of -1 mod p from a quadratic non-residue
    std::uint64_t up = std::uint64_t(p);
    std::uint64_t n = 0;
    for (std::uint64_t c = 2;; ++c) {
        if (powmod_u64(c, (up - 1) / 2, up) == up - 1) {
            n = powmod_u64(c, (up - 1) / 4, up);
            break;
        }
    }
    GaussInt g = gauss_gcd(GaussInt{p, 0}, GaussInt{std::int64_t(n), 1});
    std::int64_t a = std::llabs(g.re), b = std::llabs(g.im);
    if (a < b) std::swap(a, b);
    return {a, b};
}

bool is_gaussian_prime(GaussInt q) {
    if (is_zero(q) || is_unit(q)) return false;
    if (q.re == 0 || q.im == 0) {
        const std::int64_t a = sup_norm(q);
        return (a % 4 == 3) && is_prime_u64(std::uint64_t(a));
    }
    const std::int64_t n = norm(q);
    return is_prime_u64(std::uint64_t(n));
}

namespace {

// factor a rational integer via trial division to 1e6; any cofactor must be
// prime, which covers norms up to 1e12 (two composite factors would both
// exceed 1e6).
void factor_rational(std::uint64_t n, std::vector<std::pair<std::uint64_t, int>>& out) {
    out.clear();
    for (std::uint64_t p = 2; p * p <= n && p <= 1000000; p += (p == 2 ? 1 : 2)) {
        if (n % p == 0) {
            int e = 0;
            while (n % p == 0) { n /= p; ++e; }
            out.emplace_back(p, e);
        }
    }
    if (n > 1) {
        if (!is_prime_u64(n))
            throw domain_error("factorize: norm beyond supported factorization range (~1e12)");
        out.emplace_back(n, 1);
    }
}

GaussFactorization assemble_factorization(GaussInt l,
                                          const std::vector<std::pair<std::uint64_t, int>>& rational,
                                          const std::vector<std::pair<std::int64_t, std::int64_t>>* splits) {
    GaussFactorization f;
    GaussInt rest = l;
    for (std::size_t i = 0; i < rational.size(); ++i) {
        const std::int64_t p = std::int64_t(rational[i].first);
        const int e = rational[i].second;
        if (p == 2) {
            const GaussInt pi{1, 1};
            f.factors.push_back({pi, e});
            for (int j = 0; j < e; ++j) rest = must_divide(rest, pi);
        } else if (p % 4 == 3) {
            if (e % 2 != 0)
                throw numeric_error("factorize: odd exponent of inert prime in a norm");
            const GaussInt pi{p, 0};
            f.factors.push_back({pi, e / 2});
            for (int j = 0; j < e / 2; ++j) rest = must_divide(rest, pi);
        } else {
            std::pair<std::int64_t, std::int64_t> ab =
                splits ? (*splits)[i] : two_squares(p);
            GaussInt pi = canonical_associate(GaussInt{ab.first, ab.second});
            GaussInt pibar = canonical_associate(conj(pi));
            int e1 = 0;
            while (true) {
                auto d = exact_divide(rest, pi);
                if (!d) break;
                rest = *d;
                ++e1;
            }
            const int e2 = e - e1;
            for (int j = 0; j < e2; ++j) rest = must_divide(rest, pibar);
            if (e1 > 0) f.factors.push_back({pi, e1});
            if (e2 > 0) f.factors.push_back({pibar, e2});
        }
    }
    if (!is_unit(rest))
        throw numeric_error("factorize: internal reassembly failure");
    f.unit = rest;
    return f;
}

std::vector<GaussInt> divisors_from_factorization(const GaussFactorization& f) {
    std::vector<GaussInt> divs{GaussInt{1, 0}};
    for (const auto& [prime, exp] : f.factors) {
        const std::size_t base = divs.size();
        GaussInt pk{1, 0};
        divs.reserve(base * std::size_t(exp + 1));
        for (int e = 1; e <= exp; ++e) {
            pk = mul(pk, prime);
            for (std::size_t i = 0; i < base; ++i) divs.push_back(mul(divs[i], pk));
        }
    }
    const std::size_t n = divs.size();
    std::vector<GaussInt> all;
    all.reserve(4 * n);
    for (const GaussInt& d : divs) {
        all.push_back(d);
        all.push_back(GaussInt{-d.im, d.re});
        all.push_back(GaussInt{-d.re, -d.im});
        all.push_back(GaussInt{d.im, -d.re});
    }
    std::sort(all.begin(), all.end(), canonical_less);
    return all;
}

} // namespace

GaussFactorization factorize(GaussInt l) {
    if (is_zero(l)) throw domain_error("factorize: l = 0");
    const std::uint64_t n = std::uint64_t(norm(l));
    std::vector<std::pair<std::uint64_t, int>> rat;
    factor_rational(n, rat);
    return assemble_factorization(l, rat, nullptr);
}

std::vector<GaussInt> divisors(GaussInt l) {
    if (is_zero(l)) throw domain_error("divisors: l = 0 has infinitely many divisors");
    return divisors_from_factorization(factorize(l));
}

std::uint64_t divisor_count(GaussInt l) {
    if (is_zero(l)) throw domain_error("divisor_count: l = 0");
    GaussFactorization f = factorize(l);
    std::uint64_t c = 4;
    for (const auto& [prime, exp] : f.factors) c *= std::uint64_t(exp + 1);
    return c;
}

std::string to_string(AnnulusMode m) {
    switch (m) {
        case AnnulusMode::all: return "all";
        case AnnulusMode::primes: return "primes";
        case AnnulusMode::custom: return "custom";
    }
    return "?";
}

std::optional<AnnulusMode> parse_mode(const std::string& s) {
    if (s == "all") return AnnulusMode::all;
    if (s == "primes") return AnnulusMode::primes;
    if (s == "custom") return AnnulusMode::custom;
    return std::nullopt;
}

Annulus annulus(double M, AnnulusMode mode, const std::vector<GaussInt>& custom) {
    if (!(M > 0) || !std::isfinite(M)) throw domain_error("annulus: M must be positive");
    if (mode == AnnulusMode::all && M < 2) throw domain_error("annulus: M >= 2 required in mode=all");
    if (mode == AnnulusMode::primes && M < 4) throw domain_error("annulus: M >= 4 required in mode=primes");
    Annulus out;
    out.M = M;
    out.mode = mode;
    if (mode != AnnulusMode::custom && 3.0 * M * M > 2.5e7)
        throw domain_error("annulus: shell too large to materialize at desk scale");
    auto in_shell = [M](std::int64_t s) { return 2.0 * double(s) > M && double(s) <= M; };
    if (mode == AnnulusMode::custom) {
        for (const GaussInt& q : custom)
            if (!is_zero(q) && in_shell(sup_norm(q))) out.members.push_back(q);
    } else {
        const std::int64_t hi = std::int64_t(std::floor(M));
        const std::int64_t lo = std::int64_t(std::floor(M / 2.0));   // shell starts past here
        for (std::int64_t s = lo; s <= hi; ++s) {
            if (s < 1 || !in_shell(s)) continue;
            // walk the sup-norm circle of radius s
            for (std::int64_t a = -s; a <= s; ++a) {
                for (std::int64_t b : {-s, s}) {
                    GaussInt q{a, b};
                    if (mode != AnnulusMode::primes || is_gaussian_prime(q)) out.members.push_back(q);
                    if (a > -s && a < s) {
                        GaussInt r{b, a};
                        if (mode != AnnulusMode::primes || is_gaussian_prime(r)) out.members.push_back(r);
                    }
                }
            }
        }
    }
    std::sort(out.members.begin(), out.members.end(), canonical_less);
    return out;
}

SpfSieve::SpfSieve(std::uint32_t limit) : limit_(limit), spf_(std::size_t(limit) + 1, 0) {
    for (std::uint64_t i = 2; i <= limit; ++i) {
        if (spf_[i] == 0) {
            for (std::uint64_t j = i; j <= limit; j += i)
                if (spf_[j] == 0) spf_[j] = std::uint32_t(i);
        }
    }
}

void SpfSieve::factor(std::uint32_t n, std::vector<std::pair<std::uint32_t, int>>& out) const {
    out.clear();
    while (n > 1) {
        const std::uint32_t p = spf_[n];
        int e = 0;
        while (n % p == 0) { n /= p; ++e; }
        out.emplace_back(p, e);
    }
}

bool SpfSieve::is_prime(std::uint32_t n) const { return n >= 2 && spf_[n] == n; }

DivisorScanner::DivisorScanner(std::uint32_t norm_limit)
    : sieve_(norm_limit), split_memo_(std::size_t(norm_limit) + 1, {0, 0}) {}

void DivisorScanner::warm_splits() {
    for (std::uint64_t p = 5; p <= sieve_.limit(); p += 4)
        if (sieve_.is_prime(std::uint32_t(p)) && split_memo_[p].first == 0)
            split_memo_[p] = two_squares(std::int64_t(p));
}

GaussFactorization DivisorScanner::factorize(GaussInt l) const {
    if (is_zero(l)) throw domain_error("factorize: l = 0");
    const std::int64_t n64 = norm(l);
    if (n64 > sieve_.limit())
        throw domain_error("DivisorScanner: norm exceeds sieve limit");
    std::vector<std::pair<std::uint32_t, int>> rat32;
    sieve_.factor(std::uint32_t(n64), rat32);
    std::vector<std::pair<std::uint64_t, int>> rat(rat32.begin(), rat32.end());
    std::vector<std::pair<std::int64_t, std::int64_t>> splits(rat.size(), {0, 0});
    for (std::size_t i = 0; i < rat.size(); ++i) {
        const std::uint64_t p = rat[i].first;
        if (p % 4 == 1) {
            auto& memo = split_memo_[p];
            if (memo.first == 0) memo = two_squares(std::int64_t(p));
            splits[i] = memo;
        }
    }
    return assemble_factorization(l, rat, &splits);
}

std::uint64_t DivisorScanner::divisor_count(GaussInt l) const {
    GaussFactorization f = factorize(l);
    std::uint64_t c = 4;
    for (const auto& [prime, exp] : f.factors) c *= std::uint64_t(exp + 1);
    return c;
}

std::vector<GaussInt> DivisorScanner::divisors(GaussInt l) const {
    return divisors_from_factorization(factorize(l));
}

DivisorStatTable divisor_bound_stat(std::int64_t L) {
    if (L < 3) throw domain_error("divisor_bound_stat: L >= 3 required");
    const std::uint64_t norm_limit = std::uint64_t(2) * L * L;
    if (norm_limit > 0x7fffffff) throw domain_error("divisor_bound_stat: L too large for sieve");
    DivisorScanner scan{std::uint32_t(norm_limit)};

    DivisorStatTable table;
    std::int64_t lo = 3;
    while (lo <= L) {
        // dyadic ranges [2^j, 2^{j+1}) clipped to [3, L]
        std::int64_t pow2 = 4;
        while (pow2 <= lo) pow2 *= 2;
        DivisorStatRow row;
        row.lo = lo;
        row.hi = std::min(L, pow2 - 1);
        table.rows.push_back(row);
        lo = pow2;
    }

    // The statistic is invariant under units and conjugation, so scanning the
    // octant a >= b >= 0, a >= 3 covers the ring. Counts report the full ring.
    for (std::int64_t a = 3; a <= L; ++a) {
        auto& row = *std::find_if(table.rows.begin(), table.rows.end(),
                                  [&](const DivisorStatRow& r) { return a >= r.lo && a <= r.hi; });
        const double lls = std::log(std::log(double(a)));
        const double ls = std::log(double(a));
        for (std::int64_t b = 0; b <= a; ++b) {
            const GaussInt l{a, b};
            const double zeta = std::log(double(scan.divisor_count(l))) * lls / ls;
            row.count += (b == 0 || b == a) ? 4 : 8;
            if (zeta > row.max_zeta) {
                row.max_zeta = zeta;
                row.argmax = l;
            }
        }
    }
    for (const auto& r : table.rows) {
        if (r.max_zeta > table.global_max) {
            table.global_max = r.max_zeta;
            table.global_argmax = r.argmax;
        }
    }
    return table;
}

std::vector<PrimeCountRow> prime_count_stat(const std::vector<double>& Ms) {
    std::vector<PrimeCountRow> rows;
    for (double M : Ms) {
        if (M < 4) throw domain_error("prime_count_stat: each M >= 4 required");
        PrimeCountRow row;
        row.M = M;
        const std::int64_t hi = std::int64_t(std::floor(M));
        // octant count with orbit sizes (units x conjugation)
        std::uint64_t count = 0;
        for (std::int64_t a = 1; a <= hi; ++a) {
            if (!(2.0 * double(a) > M)) continue;
            for (std::int64_t b = 0; b <= a; ++b) {
                if (!is_gaussian_prime(GaussInt{a, b})) continue;
                count += (b == 0 || b == a) ? 4 : 8;
            }
        }
        row.count = count;
        row.ratio = double(count) * std::log(M) / (M * M);
        rows.push_back(row);
    }
    return rows;
}

} // namespace salem2d
