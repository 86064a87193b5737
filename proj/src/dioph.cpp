#include "salem2d/dioph.hpp"

#include <algorithm>
#include <cmath>

namespace salem2d {

namespace {

// nearest integer with half-integer ties toward negative infinity
std::int64_t nearest_tie_down(double y) { return std::int64_t(std::ceil(y - 0.5)); }

double default_psi(GaussInt q, double tau) {
    return std::pow(double(sup_norm(q)), -tau);
}

} // namespace

std::vector<Witness> find_witnesses(Vec2 x, const ApproxTarget& target) {
    if (!(target.Q_max >= 2)) throw domain_error("find_witnesses: Q_max >= 2 required");
    if (!target.psi && !(target.tau > 0))
        throw domain_error("find_witnesses: tau must be positive with the default psi");
    std::vector<Witness> out;
    const std::int64_t Q = std::int64_t(std::floor(target.Q_max));

    auto try_q = [&](GaussInt q) {
        if (target.mode == AnnulusMode::primes && !is_gaussian_prime(q)) return;
        if (target.mode == AnnulusMode::custom &&
            !std::binary_search(target.custom_Q.begin(), target.custom_Q.end(), q, canonical_less))
            return;
        const Vec2 y = mul(q, x) - target.theta;
        const GaussInt r{nearest_tie_down(y.x), nearest_tie_down(y.y)};
        const double dist = std::max(std::fabs(y.x - double(r.re)), std::fabs(y.y - double(r.im)));
        const double scale = target.psi ? target.psi(q) : default_psi(q, target.tau);
        if (!(scale > 0)) throw domain_error("find_witnesses: psi must be positive");
        const double defect = dist / scale;
        if (defect <= 1.0) out.push_back({q, r, defect});
    };

    for (std::int64_t a = -Q; a <= Q; ++a)
        for (std::int64_t b = -Q; b <= Q; ++b)
            if (a != 0 || b != 0) try_q(GaussInt{a, b});

    std::sort(out.begin(), out.end(), [](const Witness& w1, const Witness& w2) {
        return canonical_less(w1.q, w2.q);
    });
    return out;
}

SupportChain verify_support_chain(const MeasureEvaluator& eval, Vec2 x) {
    const MeasureSpec& spec = eval.spec();
    if (spec.stages.empty()) throw domain_error("verify_support_chain: spec has no stages");
    if (!(eval.density(x) > 0.0))
        throw domain_error("verify_support_chain: density must be positive at x");

    SupportChain chain;
    for (std::size_t k = 1; k <= spec.stages.size(); ++k) {
        const FMParams params = spec.stage_params(k);
        std::optional<Witness> found;
        for (const GaussInt& q : params.ann.members) {
            const Vec2 y = mul(q, x) - params.theta;
            const GaussInt r{nearest_tie_down(y.x), nearest_tie_down(y.y)};
            const double dist = std::max(std::fabs(y.x - double(r.re)),
                                         std::fabs(y.y - double(r.im)));
            if (dist <= params.eps) {
                const double defect = dist / default_psi(q, spec.tau);
                found = Witness{q, r, defect};
                break;
            }
        }
        if (!found) {
            chain.ok = false;
            chain.note = "no stage-" + std::to_string(k) +
                         " witness despite positive density (implementation contradiction)";
            return chain;
        }
        chain.stage_witnesses.push_back(*found);
    }
    for (std::size_t i = 0; i + 1 < chain.stage_witnesses.size(); ++i) {
        if (chain.stage_witnesses[i].q == chain.stage_witnesses[i + 1].q) {
            chain.ok = false;
            chain.note = "stage witnesses not distinct (annulus separation violated)";
            return chain;
        }
        if (sup_norm(chain.stage_witnesses[i].q) >= sup_norm(chain.stage_witnesses[i + 1].q)) {
            chain.ok = false;
            chain.note = "stage witness sup-norms not increasing";
            return chain;
        }
    }
    chain.ok = true;
    return chain;
}

double dimension_formula(double tau, DimensionVariant) {
    if (tau <= 1.0) return 2.0;
    return std::min(4.0 / (1.0 + tau), 2.0);
}

std::vector<DensityRow> check_density_condition(const ApproxTarget& target,
                                                const DensityCondition& cond) {
    if (cond.M_list.empty()) throw domain_error("check_density_condition: empty M list");
    if (!(cond.a >= 0)) throw domain_error("check_density_condition: a >= 0 required");
    std::vector<DensityRow> rows;
    for (double M : cond.M_list) {
        DensityRow row;
        row.M = M;
        Annulus ann;
        try {
            ann = annulus(M, target.mode, target.custom_Q);
        } catch (const domain_error&) {
            // below the mode precondition: reported as a failing row
            rows.push_back(row);
            continue;
        }
        row.Q_count = ann.members.size();
        if (ann.members.empty()) {
            rows.push_back(row);
            continue;
        }
        double eps = std::numeric_limits<double>::infinity();
        for (const GaussInt& q : ann.members) {
            const double v = target.psi ? target.psi(q) : default_psi(q, target.tau);
            if (!(v > 0)) throw domain_error("check_density_condition: psi must be positive");
            eps = std::min(eps, v);
        }
        row.eps = eps;
        const double h = cond.h_kind == HKind::constant ? cond.h_scale
                                                        : cond.h_scale * std::log(M);
        row.ratio = double(row.Q_count) * std::pow(eps, cond.a) * h / std::pow(M, cond.a);
        row.pass = row.ratio >= 1.0;
        rows.push_back(row);
    }
    return rows;
}

} // namespace salem2d
