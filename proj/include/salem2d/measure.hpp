#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "salem2d/bump.hpp"
#include "salem2d/fm.hpp"
#include "salem2d/gauss.hpp"

namespace salem2d {

// Decay envelope used as the per-stage error budget. The standard variant is
// |xi|^{-a} exp(ln|xi| / ln ln|xi|) past e and 1 otherwise; the prime variant
// replaces the exponential correction by ln|xi| ln ln|xi|. Sup-norm metric;
// the low branch is closed at |xi| = e.
enum class GVariant { standard, prime };
double g_weight(double sup, double a, GVariant variant = GVariant::standard);
double g_weight(Vec2 xi, double a, GVariant variant = GVariant::standard);
GVariant g_variant_for(AnnulusMode mode);

// Initial window chi_0: the product bump scaled and translated so that its
// support square sits inside the closed ball.
struct WindowSpec {
    Vec2 center{0.0, 0.0};
    double radius = 1.0;
    BumpSpec bump{};
};

class Window {
  public:
    explicit Window(WindowSpec spec);
    const WindowSpec& spec() const { return spec_; }
    double scale() const { return scale_; }          // radius / sqrt(2)
    const Bump& bump() const { return bump_; }
    double chi(Vec2 x) const;                        // nonnegative, integral 1
    std::complex<double> chi_hat(Vec2 xi) const;     // phase * phi_hat(scale xi)
    // sup-norm radius past which |chi_hat| falls below `floor` (from the
    // pinned envelope constant)
    double effective_radius(double floor) const;

  private:
    WindowSpec spec_;
    Bump bump_;
    double scale_;
};

// Verification record of one accepted stage. grid_margin is
// max |mu_k - mu_{k-1}| / g over the quarter-spaced grid |xi| <= R_check and
// must not exceed delta. The tail fields decompose the truncation error of
// the lattice sums: `tail_chi0` is the rigorous window-decay component;
// `tail_model_g` is the inductive g-envelope component, which is recorded
// for the report but is not a usable bound at desk scale (see README).
struct StageReport {
    double M = 0.0;
    double delta = 0.0;
    double R_check = 0.0;
    double enum_radius = 0.0;
    std::uint64_t grid_points = 0;
    double grid_margin = 0.0;          // max |D|/g on the grid
    Vec2 grid_argmax{0.0, 0.0};
    double grid_min_g = 0.0;
    double coeff_abs_sum = 0.0;        // sum of |coeff| over the enumerated box, zero mode excluded
    double tail_chi0 = 0.0;
    double tail_model_g = 0.0;
    double band_margin = 0.0;          // max |D|/g over sampled radii in (R_check, band_hi]
    double band_hi = 0.0;
    std::complex<double> mu_prev_zero{0.0, 0.0};
    std::complex<double> mu_zero{0.0, 0.0};
};

struct Stage {
    double M = 0.0;
    double delta = 0.0;
    StageReport report;
};

struct MeasureSpec {
    WindowSpec window;
    double tau = 0.0;
    AnnulusMode mode = AnnulusMode::all;
    std::vector<Stage> stages;
    std::vector<double> trunc_radii;   // per-level point-evaluation radii

    double a() const { return 2.0 / (1.0 + tau); }
    FMParams stage_params(std::size_t k) const;   // 1-based stage index
};

struct BuildOptions {
    double delta0 = 0.25;          // stage-1 budget; later stages halve it
    double M0 = 1.0;               // stage-1 search start; later stages start at 2 M_{k-1}
    double grid_cap = 224.0;       // dense-grid radius cap: R_check = min(8M, grid_cap)
    double enum_margin = 96.0;     // enumeration radius past the grid
    double band_factor = 4.0;      // sampled band extends to band_factor * R_check
    int band_samples = 96;
    double search_cap = double(1 << 20);
    std::vector<double> trunc_radii{40.0, 40.0, 40.0};
};

struct BuildDiagnostics {
    std::complex<double> mu_hat_zero{0.0, 0.0};
    double telescope_max_ratio = 0.0;   // max |mu_k - mu_0| / g over the final grid
    Vec2 telescope_argmax{0.0, 0.0};
};

struct BuildResult {
    MeasureSpec spec;
    BuildDiagnostics diag;
};

// Doubling search for the smallest power-of-two M >= M0 whose stage criterion
// |mu-hat difference| <= delta * g holds on the verification grid
// (spacing 1/4, sup-radius 8M) with the truncation-tail decomposition
// recorded; throws search_failure past options.search_cap.
struct MStarResult {
    double M_star = 0.0;
    StageReport report;
};
MStarResult find_M_star(double delta, double M0, const MeasureSpec& spec_so_far,
                        const BuildOptions& options = {});

// Runs the recursion delta_k = 2^{-k-1}, M_1 from M0 = 1, M_{k+1} from 2 M_k.
// k_max is capped at 3 (nested lattice sums grow geometrically).
BuildResult build_measure(const WindowSpec& window, double tau, AnnulusMode mode,
                          int k_max, const BuildOptions& options = {});

// Point evaluation of mu-hat_k via nested truncated lattice sums, and of the
// stage density. Coefficients are computed on demand and cached.
class MeasureEvaluator {
  public:
    explicit MeasureEvaluator(MeasureSpec spec);
    ~MeasureEvaluator();
    MeasureEvaluator(MeasureEvaluator&&) noexcept;

    const MeasureSpec& spec() const;

    struct TransformValue {
        std::complex<double> value{0.0, 0.0};
        double tail_chi0 = 0.0;     // rigorous truncation component
        double tail_model_g = 0.0;  // inductive-envelope component (recorded)
    };
    // mu-hat_k(xi); k = 0 is the bare window transform. Throws
    // truncation_insufficient if the rigorous component exceeds `tol`
    // (default: no check).
    TransformValue transform(int k, Vec2 xi, double tol = 0.0) const;

    double density(Vec2 x) const;   // chi_0(x) * prod_j F_{M_j}(x)

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Dyadic-shell scan of |mu-hat| / g with a deterministic low-discrepancy
// sample pattern.
struct DecayShell {
    double lo = 0.0;
    double hi = 0.0;
    double max_ratio = 0.0;
    Vec2 argmax{0.0, 0.0};
    std::uint64_t samples = 0;
};
struct DecayReport {
    std::vector<DecayShell> shells;
};
DecayReport decay_scan(const MeasureEvaluator& eval, int n_shells, int samples_per_shell);

} // namespace salem2d
