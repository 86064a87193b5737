#include "salem2d/fm.hpp"

#include <algorithm>
#include <cmath>

#include "salem2d/parallel.hpp"

namespace salem2d {

namespace {

bool in_shell(const Annulus& ann, GaussInt q) {
    const std::int64_t s = sup_norm(q);
    return 2.0 * double(s) > ann.M && double(s) <= ann.M;
}

bool in_population(const FMParams& params, GaussInt q) {
    switch (params.mode) {
        case AnnulusMode::all:
            return in_shell(params.ann, q);
        case AnnulusMode::primes:
            return in_shell(params.ann, q) && is_gaussian_prime(q);
        case AnnulusMode::custom:
            return std::binary_search(params.ann.members.begin(), params.ann.members.end(), q,
                                      canonical_less);
    }
    return false;
}

} // namespace

FMParams make_fm_params(double M, double tau, AnnulusMode mode, BumpSpec bump,
                        Vec2 theta, std::function<double(GaussInt)> psi,
                        std::vector<GaussInt> custom_Q) {
    if (!(tau > 0.0)) throw domain_error("FMParams: tau must be positive");
    FMParams p;
    p.M = M;
    p.tau = tau;
    p.mode = mode;
    p.custom_Q = std::move(custom_Q);
    p.theta = theta;
    p.psi = std::move(psi);
    p.bump = Bump{bump};
    p.a = 2.0 / (1.0 + tau);
    if (!(double(bump.K) > 2.0 + p.a))
        throw domain_error("FMParams: bump smoothness K must exceed 2 + a");
    p.ann = annulus(M, mode, p.custom_Q);
    if (p.ann.members.empty()) throw domain_error("FMParams: empty annulus");
    if (p.psi) {
        double eps = std::numeric_limits<double>::infinity();
        for (const GaussInt& q : p.ann.members) {
            const double v = p.psi(q);
            if (!(v > 0.0)) throw domain_error("FMParams: psi must be positive on Q(M)");
            eps = std::min(eps, v);
        }
        p.eps = eps;
    } else {
        p.eps = 0.5 * std::pow(M, -tau);
    }
    if (!(p.eps > 0.0 && p.eps < 0.5))
        throw domain_error("FMParams: eps(M) must lie in (0, 1/2)");
    return p;
}

double fm_eval(const FMParams& params, Vec2 x) {
    // eps < 1/2, so at most the nearest lattice point contributes to the
    // periodization of each term.
    const double eps = params.eps;
    double acc = 0.0;
    for (const GaussInt& q : params.ann.members) {
        const Vec2 y = mul(q, x) - params.theta;
        const double ux = y.x - double(std::llround(y.x));
        const double uy = y.y - double(std::llround(y.y));
        if (std::fabs(ux) < eps && std::fabs(uy) < eps)
            acc += params.bump.phi_eps(eps, Vec2{ux, uy});
    }
    return acc / double(params.ann.members.size());
}

namespace detail {

std::complex<double> fm_coeff_general(const FMParams& params, GaussInt ell) {
    if (is_zero(ell)) return {1.0, 0.0};
    std::complex<double> acc{0.0, 0.0};
    const GaussInt lbar = conj(ell);
    for (const GaussInt& q : divisors(lbar)) {
        if (!in_population(params, q)) continue;
        const GaussInt v = *exact_divide(lbar, q);
        const GaussInt k = conj(v);   // = ell / conj(q)
        const double mag = params.bump.phi_hat(Vec2{params.eps * double(k.re),
                                                    params.eps * double(k.im)});
        acc += std::complex<double>{mag, 0.0} * character(to_vec(k), params.theta);
    }
    return acc / double(params.ann.members.size());
}

} // namespace detail

std::complex<double> fm_coeff(const FMParams& params, GaussInt ell) {
    if (is_zero(ell)) return {1.0, 0.0};
    if (params.generalized()) return detail::fm_coeff_general(params, ell);
    double acc = 0.0;
    const GaussInt lbar = conj(ell);
    for (const GaussInt& q : divisors(lbar)) {
        if (!in_population(params, q)) continue;
        const GaussInt v = *exact_divide(lbar, q);
        acc += params.bump.phi_hat(Vec2{params.eps * double(v.re), params.eps * double(v.im)});
    }
    return {acc / double(params.ann.members.size()), 0.0};
}

std::vector<GaussInt> annulus_coeff_population(const FMParams& params, GaussInt ell) {
    if (is_zero(ell)) throw domain_error("annulus_coeff_population: ell = 0");
    std::vector<GaussInt> out;
    for (const GaussInt& q : divisors(conj(ell)))
        if (in_population(params, q)) out.push_back(q);
    return out;
}

ShellScanTable fm_coeff_bound_check(const FMParams& params, std::int64_t L_max, double zeta) {
    if (L_max < 2) throw domain_error("fm_coeff_bound_check: L_max >= 2 required");
    const bool prime_weight = params.mode == AnnulusMode::primes;
    ShellScanTable table;
    table.zeta = zeta;
    for (std::int64_t hi = 2; hi / 2 < L_max; hi *= 2)
        table.rows.push_back({double(hi) / 2.0, double(std::min(hi, L_max)), 0.0, GaussInt{}, 0});

    const std::uint64_t norm_limit = std::uint64_t(2) * L_max * L_max;
    DivisorScanner scan{std::uint32_t(norm_limit)};
    // axis table: coefficient arguments are eps * (integer quotient); quotient
    // components are bounded by sqrt(2) L / (M/2)
    const std::int64_t n_max = std::int64_t(std::ceil(2.0 * M_SQRT2 * double(L_max) / params.M)) + 2;
    const std::vector<double> axis = params.bump.axis_table(params.eps, n_max);

    // |coeff| is invariant under unit multiples and conjugation for the
    // symmetric population modes, so an octant scan suffices there.
    const bool octant = params.mode != AnnulusMode::custom && !params.generalized();

    struct Best {
        double ratio = -1.0;
        GaussInt arg;
    };
    const std::size_t nrows = table.rows.size();
    std::vector<std::vector<Best>> bests;
    std::vector<std::vector<std::uint64_t>> counts;

    auto ratio_of = [&](GaussInt l, double s) -> double {
        double acc = 0.0;
        for (const GaussInt& q : scan.divisors(conj(l))) {
            if (!in_population(params, q)) continue;
            const GaussInt v = *exact_divide(conj(l), q);
            const std::int64_t vr = std::llabs(v.re), vi = std::llabs(v.im);
            const double mag = (vr <= n_max && vi <= n_max)
                                   ? axis[std::size_t(vr)] * axis[std::size_t(vi)]
                                   : params.bump.phi_hat(Vec2{params.eps * double(v.re),
                                                              params.eps * double(v.im)});
            acc += mag;
        }
        const double coeff = std::fabs(acc) / double(params.ann.members.size());
        const double ls = std::log(s);
        const double weight = prime_weight ? ls : std::exp(zeta * ls / std::log(ls));
        return coeff * std::pow(s, params.a) / weight;
    };

    const std::int64_t a_lo = prime_weight ? 2 : 1;
    const std::int64_t n_chunks = 64;
    bests.assign(std::size_t(n_chunks), std::vector<Best>(nrows));
    counts.assign(std::size_t(n_chunks), std::vector<std::uint64_t>(nrows, 0));
    const std::int64_t span = L_max - a_lo + 1;
    const std::int64_t per = (span + n_chunks - 1) / n_chunks;

    parallel_for(0, n_chunks, [&](std::int64_t c0, std::int64_t c1) {
        for (std::int64_t c = c0; c < c1; ++c) {
            auto& best = bests[std::size_t(c)];
            auto& count = counts[std::size_t(c)];
            const std::int64_t lo = a_lo + c * per;
            const std::int64_t hi = std::min(L_max, lo + per - 1);
            for (std::int64_t a = lo; a <= hi; ++a) {
                const double s = double(a);
                std::size_t row = 0;
                while (row + 1 < nrows && !(s > table.rows[row].lo && s <= table.rows[row].hi)) ++row;
                if (octant) {
                    for (std::int64_t b = 0; b <= a; ++b) {
                        const GaussInt l{a, b};
                        const double r = ratio_of(l, s);
                        count[row] += (b == 0 || b == a) ? 4 : 8;
                        if (r > best[row].ratio) best[row] = {r, l};
                    }
                } else {
                    // full ring at sup-norm a
                    auto visit = [&](GaussInt l) {
                        const double r = ratio_of(l, s);
                        count[row] += 1;
                        if (r > best[row].ratio) best[row] = {r, l};
                    };
                    for (std::int64_t u = -a; u <= a; ++u) {
                        visit(GaussInt{u, a});
                        visit(GaussInt{u, -a});
                        if (u > -a && u < a) {
                            visit(GaussInt{a, u});
                            visit(GaussInt{-a, u});
                        }
                    }
                }
            }
        }
    }, 1);

    for (std::int64_t c = 0; c < n_chunks; ++c) {
        for (std::size_t row = 0; row < nrows; ++row) {
            table.rows[row].count += counts[std::size_t(c)][row];
            if (bests[std::size_t(c)][row].ratio > table.rows[row].max_ratio) {
                table.rows[row].max_ratio = bests[std::size_t(c)][row].ratio;
                table.rows[row].argmax = bests[std::size_t(c)][row].arg;
            }
        }
    }
    for (const auto& r : table.rows) table.max_ratio = std::max(table.max_ratio, r.max_ratio);
    return table;
}

CoeffTable::CoeffTable(const FMParams& params, std::int64_t radius) : radius_(radius) {
    if (radius < 1) throw domain_error("CoeffTable: radius >= 1 required");
    const std::uint64_t norm_limit = std::uint64_t(2) * radius * radius;
    if (norm_limit > 0xffffffffull) throw domain_error("CoeffTable: radius too large");
    const std::int64_t side = 2 * radius + 1;
    data_.assign(std::size_t(side) * std::size_t(side), {0.0, 0.0});

    DivisorScanner scan{std::uint32_t(norm_limit)};
    const std::int64_t n_max = std::int64_t(std::ceil(2.0 * M_SQRT2 * double(radius) / params.M)) + 2;
    const std::vector<double> axis = params.bump.axis_table(params.eps, n_max);
    // warm the two-squares memo single-threaded, then fill rows in parallel
    scan.warm_splits();

    const bool symmetric = params.mode != AnnulusMode::custom && !params.generalized();

    auto coeff_at = [&](GaussInt l) -> std::complex<double> {
        std::complex<double> acc{0.0, 0.0};
        for (const GaussInt& q : scan.divisors(conj(l))) {
            if (!in_population(params, q)) continue;
            const GaussInt v = *exact_divide(conj(l), q);
            const std::int64_t vr = std::llabs(v.re), vi = std::llabs(v.im);
            const double mag = (vr <= n_max && vi <= n_max)
                                   ? axis[std::size_t(vr)] * axis[std::size_t(vi)]
                                   : params.bump.phi_hat(Vec2{params.eps * double(v.re),
                                                              params.eps * double(v.im)});
            if (symmetric) {
                acc += mag;
            } else {
                acc += std::complex<double>{mag, 0.0} * character(to_vec(conj(v)), params.theta);
            }
        }
        return acc / double(params.ann.members.size());
    };

    if (symmetric) {
        parallel_for(0, radius + 1, [&](std::int64_t lo, std::int64_t hi) {
            for (std::int64_t a = lo; a < hi; ++a) {
                for (std::int64_t b = 0; b <= a; ++b) {
                    if (a == 0) continue;
                    const std::complex<double> c = coeff_at(GaussInt{a, b});
                    data_[index(a, b)] = c;
                    data_[index(-b, a)] = c;
                    data_[index(-a, -b)] = c;
                    data_[index(b, -a)] = c;
                    data_[index(a, -b)] = c;
                    data_[index(b, a)] = c;
                    data_[index(-a, b)] = c;
                    data_[index(-b, -a)] = c;
                }
            }
        }, 4);
    } else {
        parallel_for(-radius, radius + 1, [&](std::int64_t lo, std::int64_t hi) {
            for (std::int64_t a = lo; a < hi; ++a)
                for (std::int64_t b = -radius; b <= radius; ++b)
                    if (a != 0 || b != 0) data_[index(a, b)] = coeff_at(GaussInt{a, b});
        }, 4);
    }
    data_[index(0, 0)] = {1.0, 0.0};

    for (std::int64_t b = -radius; b <= radius; ++b) {
        for (std::int64_t a = -radius; a <= radius; ++a) {
            if (a == 0 && b == 0) continue;
            const double m = std::abs(data_[index(a, b)]);
            abs_sum_ += m;
            max_abs_ = std::max(max_abs_, m);
        }
    }
}

} // namespace salem2d
