#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "salem2d/gauss.hpp"
#include "salem2d/measure.hpp"

namespace salem2d {

// Membership target for the well-approximable sets: witnesses are searched
// over 0 < sup_norm(q) <= Q_max, filtered by mode. psi defaults to
// q -> sup_norm(q)^{-tau}.
struct ApproxTarget {
    double tau = 0.0;
    AnnulusMode mode = AnnulusMode::all;
    Vec2 theta{0.0, 0.0};
    std::function<double(GaussInt)> psi;
    double Q_max = 0.0;
    std::vector<GaussInt> custom_Q;
};

// A pair (q, r) with defect = |qx - r - theta| / psi(q); accepted when <= 1.
struct Witness {
    GaussInt q;
    GaussInt r;
    double defect = 0.0;
};

// All witnesses with defect <= 1, r the componentwise nearest Gaussian
// integer to qx - theta (half-integer ties round toward negative infinity),
// sorted by (sup_norm(q), re, im).
std::vector<Witness> find_witnesses(Vec2 x, const ApproxTarget& target);

// Per-stage support verification: a density-positive point must admit, in
// every stage annulus, a witness with |qx - r| <= eps(M_k) (defect <= 1/2),
// and the stage witnesses have pairwise distinct q by annulus separation.
struct SupportChain {
    bool ok = false;
    std::vector<Witness> stage_witnesses;
    std::string note;   // set when the chain fails (contradiction flag)
};
SupportChain verify_support_chain(const MeasureEvaluator& eval, Vec2 x);

// min{4/(1+tau), 2}; full plane (dimension 2) for tau <= 1.
enum class DimensionVariant { hausdorff_fourier };
double dimension_formula(double tau, DimensionVariant variant = DimensionVariant::hausdorff_fourier);

// |Q(M)| eps(M)^a h(M) >= M^a check per M.
enum class HKind { constant, log };
struct DensityCondition {
    double a = 0.0;
    HKind h_kind = HKind::constant;
    double h_scale = 1.0;    // h(M) = h_scale, or h_scale * ln M
    std::vector<double> M_list;
};
struct DensityRow {
    double M = 0.0;
    std::uint64_t Q_count = 0;
    double eps = 0.0;
    double ratio = 0.0;      // |Q(M)| eps^a h(M) / M^a
    bool pass = false;
};
std::vector<DensityRow> check_density_condition(const ApproxTarget& target,
                                                const DensityCondition& cond);

} // namespace salem2d
