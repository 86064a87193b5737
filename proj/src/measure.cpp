#include "salem2d/measure.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <mutex>
#include <unordered_map>
#include <cstdio>
#include <cstdlib>

#include "salem2d/errors.hpp"
#include "salem2d/parallel.hpp"

namespace salem2d {

// ---------------------------------------------------------------------------
// g weight

double g_weight(double sup, double a, GVariant variant) {
    static const double E = std::exp(1.0);
    if (sup <= E) return 1.0;
    const double ls = std::log(sup);
    if (variant == GVariant::standard)
        return std::pow(sup, -a) * std::exp(ls / std::log(ls));
    return std::pow(sup, -a) * ls * std::log(ls);
}

double g_weight(Vec2 xi, double a, GVariant variant) {
    return g_weight(sup_norm(xi), a, variant);
}

GVariant g_variant_for(AnnulusMode mode) {
    return mode == AnnulusMode::primes ? GVariant::prime : GVariant::standard;
}

// ---------------------------------------------------------------------------
// window

Window::Window(WindowSpec spec)
    : spec_(spec), bump_(spec.bump), scale_(spec.radius / std::sqrt(2.0)) {
    if (!(spec.radius > 0)) throw domain_error("Window: ball radius must be positive");
}

double Window::chi(Vec2 x) const {
    const Vec2 u{(x.x - spec_.center.x) / scale_, (x.y - spec_.center.y) / scale_};
    return bump_.phi(u) / (scale_ * scale_);
}

std::complex<double> Window::chi_hat(Vec2 xi) const {
    const double mag = bump_.phi_hat(Vec2{scale_ * xi.x, scale_ * xi.y});
    if (spec_.center.x == 0.0 && spec_.center.y == 0.0) return {mag, 0.0};
    return std::complex<double>{mag, 0.0} * character(xi, spec_.center);
}

double Window::effective_radius(double floor) const {
    const double c = bump_.envelope_const();
    const int k1 = spec_.bump.K + 1;
    return (std::pow(c / floor, 1.0 / double(k1)) - 1.0) / scale_;
}

// ---------------------------------------------------------------------------
// spec helpers

FMParams MeasureSpec::stage_params(std::size_t k) const {
    if (k < 1 || k > stages.size()) throw domain_error("stage_params: stage index out of range");
    return make_fm_params(stages[k - 1].M, tau, mode, window.bump);
}

namespace {

// ---------------------------------------------------------------------------
// integer-lattice planes and FFT linear convolution

struct Plane {
    std::int64_t R = 0;
    std::vector<std::complex<double>> v;

    explicit Plane(std::int64_t radius = 0)
        : R(radius), v(std::size_t(2 * radius + 1) * std::size_t(2 * radius + 1)) {}
    std::int64_t side() const { return 2 * R + 1; }
    std::size_t idx(std::int64_t x, std::int64_t y) const {
        return std::size_t(y + R) * std::size_t(side()) + std::size_t(x + R);
    }
    std::complex<double>& at(std::int64_t x, std::int64_t y) { return v[idx(x, y)]; }
    const std::complex<double>& at(std::int64_t x, std::int64_t y) const { return v[idx(x, y)]; }
};

std::int64_t next_fast_size(std::int64_t n) {
    for (;; ++n) {
        std::int64_t m = n;
        for (std::int64_t f : {2, 3, 5, 7})
            while (m % f == 0) m /= f;
        if (m == 1) return n;
    }
}

class Convolver {
  public:
    ~Convolver() { clear(); }

    // dst(m) = sum_{|l| <= Rc} coeff(l) src(m - l) for |m| <= Rd, src treated
    // as zero beyond its radius. Requires Rd <= Rs + Rc.
    Plane convolve(const Plane& src, const Plane& coeff, std::int64_t Rd) {
        const std::int64_t Rs = src.R, Rc = coeff.R;
        if (Rd > Rs + Rc) throw domain_error("convolve: requested radius exceeds support");
        const std::int64_t N = next_fast_size(2 * Rs + 1 + 2 * Rc + 1 - 1);
        if (N > 6144) throw numeric_error("convolve: transform size exceeds memory budget");
        Entry& e = entry(N);
        auto* A = reinterpret_cast<std::complex<double>*>(e.a);
        auto* B = reinterpret_cast<std::complex<double>*>(e.b);
        std::memset(e.a, 0, sizeof(fftw_complex) * std::size_t(N) * std::size_t(N));
        std::memset(e.b, 0, sizeof(fftw_complex) * std::size_t(N) * std::size_t(N));
        for (std::int64_t y = 0; y < src.side(); ++y)
            std::memcpy(A + y * N, src.v.data() + y * src.side(),
                        sizeof(std::complex<double>) * std::size_t(src.side()));
        for (std::int64_t y = 0; y < coeff.side(); ++y)
            std::memcpy(B + y * N, coeff.v.data() + y * coeff.side(),
                        sizeof(std::complex<double>) * std::size_t(coeff.side()));
        fftw_execute(e.fwd_a);
        fftw_execute_dft(e.fwd_a, e.b, e.b);
        const double inv = 1.0 / (double(N) * double(N));
        const std::size_t total = std::size_t(N) * std::size_t(N);
        for (std::size_t i = 0; i < total; ++i) A[i] *= B[i] * inv;
        fftw_execute(e.bwd_a);
        Plane dst(Rd);
        const std::int64_t off = Rs + Rc;   // linear-convolution origin
        for (std::int64_t y = -Rd; y <= Rd; ++y)
            for (std::int64_t x = -Rd; x <= Rd; ++x)
                dst.at(x, y) = A[(y + off) * N + (x + off)];
        return dst;
    }

  private:
    struct Entry {
        std::int64_t N = 0;
        fftw_complex* a = nullptr;
        fftw_complex* b = nullptr;
        fftw_plan fwd_a{};
        fftw_plan bwd_a{};
    };

    Entry& entry(std::int64_t N) {
        for (auto& e : entries_)
            if (e.N == N) return e;
        if (entries_.size() >= 2) drop_front();
        Entry e;
        e.N = N;
        const std::size_t total = std::size_t(N) * std::size_t(N);
        e.a = fftw_alloc_complex(total);
        e.b = fftw_alloc_complex(total);
        if (!e.a || !e.b) throw numeric_error("convolve: buffer allocation failed");
        static std::mutex plan_mu;
        std::lock_guard lock(plan_mu);
        e.fwd_a = fftw_plan_dft_2d(int(N), int(N), e.a, e.a, FFTW_FORWARD, FFTW_ESTIMATE);
        e.bwd_a = fftw_plan_dft_2d(int(N), int(N), e.a, e.a, FFTW_BACKWARD, FFTW_ESTIMATE);
        entries_.push_back(e);
        return entries_.back();
    }

    void drop_front() {
        Entry& e = entries_.front();
        fftw_destroy_plan(e.fwd_a);
        fftw_destroy_plan(e.bwd_a);
        fftw_free(e.a);
        fftw_free(e.b);
        entries_.erase(entries_.begin());
    }

    void clear() {
        while (!entries_.empty()) drop_front();
    }

    std::vector<Entry> entries_;
};

// chi0 sampled at quarter offset (ox, oy)/4 over the integer lattice.
Plane chi0_plane(const Window& window, int ox, int oy, std::int64_t R) {
    Plane p(R);
    const double sc = window.scale();
    const Bump& bump = window.bump();
    const Vec2 c = window.spec().center;
    std::vector<std::complex<double>> ax(std::size_t(2 * R + 1)), ay(std::size_t(2 * R + 1));
    for (std::int64_t m = -R; m <= R; ++m) {
        const double tx = double(m) + double(ox) / 4.0;
        const double ty = double(m) + double(oy) / 4.0;
        const double angx = -2.0 * M_PI * tx * c.x;
        const double angy = -2.0 * M_PI * ty * c.y;
        ax[std::size_t(m + R)] = bump.phi_hat1(sc * tx) * std::complex<double>{std::cos(angx), std::sin(angx)};
        ay[std::size_t(m + R)] = bump.phi_hat1(sc * ty) * std::complex<double>{std::cos(angy), std::sin(angy)};
    }
    for (std::int64_t y = -R; y <= R; ++y)
        for (std::int64_t x = -R; x <= R; ++x)
            p.at(x, y) = ax[std::size_t(x + R)] * ay[std::size_t(y + R)];
    return p;
}

// ---------------------------------------------------------------------------
// truncation-tail series

// Empirical divisor-count envelope (the Lemma-3 style statistic is pinned at
// 2.5 by the scan acceptance test).
double divisor_envelope(double s) {
    if (s < 3.0) return 16.0;
    const double ls = std::log(s);
    return std::exp(2.5 * ls / std::log(ls));
}

struct TailSetup {
    double eps = 0.0;
    double M = 0.0;
    double ann_size = 0.0;
    double axis_env = 0.0;    // bump envelope constant
    int K = 5;
};

// envelope for |coeff(l)| at sup-norm s
double coeff_envelope(const TailSetup& t, double s) {
    const double dec = std::pow(1.0 + t.eps * s / (2.0 * t.M), -double(t.K + 1));
    return std::min(1.0, divisor_envelope(s) * t.axis_env * dec / t.ann_size);
}

// rigorous window-decay component: coefficients beyond R_enum hitting the
// chi0-sized part of the previous envelope at distance >= s - eval_radius
double tail_chi0_series(const TailSetup& t, double R_enum, double eval_radius,
                        double window_scale, int K) {
    double acc = 0.0;
    for (double s = std::floor(R_enum) + 1.0; s < 1e7; s += 1.0) {
        const double d = s - eval_radius;
        if (d <= 0) continue;
        const double term = 12.0 * (s + 1.0) * coeff_envelope(t, s) * t.axis_env *
                            std::pow(1.0 + window_scale * d, -double(K + 1));
        acc += term;
        if (term < 1e-22 * (acc + 1e-300) && s > R_enum + 64) break;
    }
    return acc;
}

// inductive g-envelope component (recorded, not a usable desk-scale bound)
double tail_model_series(const TailSetup& t, double R_enum, double eval_radius,
                         double beta_prev, double a, GVariant variant) {
    if (beta_prev <= 0.0) return 0.0;
    double acc = 0.0;
    const double cut = 16.0 * t.M / std::max(t.eps, 1e-300);   // past the bump-transform reach
    double s = std::floor(R_enum) + 1.0;
    while (s < std::min(cut, 1e12)) {
        const double step = std::max(1.0, 0.01 * s);
        const double d = std::max(s - eval_radius, 3.0);
        acc += 12.0 * (s + 1.0) * coeff_envelope(t, s) * beta_prev * g_weight(d, a, variant) * step;
        s += step;
    }
    return acc;
}

// ---------------------------------------------------------------------------
// candidate verification

struct ChainLevel {
    Plane coeffs{0};
    double R_enum = 0.0;
    double abs_sum = 0.0;
    std::int64_t eval_radius = 0;   // radius at which this level's output is consumed
};

Plane table_plane(const CoeffTable& table, bool zero_center) {
    Plane p(table.radius());
    p.v = table.data();
    if (zero_center) p.at(0, 0) = {0.0, 0.0};
    return p;
}

ChainLevel make_level(const FMParams& params, std::int64_t R_enum, std::int64_t eval_radius,
                      bool zero_center) {
    CoeffTable table(params, R_enum);
    ChainLevel level;
    level.R_enum = double(R_enum);
    level.abs_sum = table.abs_sum();
    level.eval_radius = eval_radius;
    level.coeffs = table_plane(table, zero_center);
    return level;
}

struct CandidateOutcome {
    StageReport report;
    bool grid_pass = false;
};

struct CandidateContext {
    const MeasureSpec* spec = nullptr;
    const BuildOptions* options = nullptr;
    Window window;
    GVariant variant;
    double a = 0.0;
};

// Evaluates the stage criterion for candidate M on the quarter grid
// |xi| <= 8M via offset-decomposed FFT convolutions of the exact
// coefficient tables.
CandidateOutcome check_candidate(const CandidateContext& ctx, double delta, double M_cand) {
    const MeasureSpec& spec = *ctx.spec;
    const BuildOptions& opt = *ctx.options;
    const std::size_t k = spec.stages.size() + 1;

    // dense verification grid; the radius is capped so the lattice convolution
    // stays within the desk-scale budget at large M (the band samples and the
    // recorded tail components cover the frequencies past the cap)
    const std::int64_t R_grid =
        std::min(std::llround(8.0 * M_cand), std::llround(opt.grid_cap));
    const std::int64_t margin = std::llround(opt.enum_margin);
    const std::int64_t R_enum_cand = R_grid + margin;

    // chain radii, outermost first
    std::vector<std::int64_t> need(k), renum(k);
    renum[k - 1] = R_enum_cand;
    for (std::size_t j = k - 1; j >= 1; --j) {
        need[j - 1] = (j == k - 1 ? R_grid : need[j]) + renum[j];
        renum[j - 1] = need[j - 1] + margin;
    }

    FMParams cand = make_fm_params(M_cand, spec.tau, spec.mode, spec.window.bump);
    std::vector<ChainLevel> chain;
    chain.reserve(k);
    for (std::size_t j = 0; j + 1 < k; ++j)
        chain.push_back(make_level(spec.stage_params(j + 1), renum[j], need[j], false));
    chain.push_back(make_level(cand, R_enum_cand, R_grid, true));   // difference form

    const double chi_floor = 1e-14;
    const std::int64_t r_chi = std::llround(std::ceil(ctx.window.effective_radius(chi_floor)));

    StageReport rep;
    rep.M = M_cand;
    rep.delta = delta;
    rep.R_check = double(R_grid);
    rep.enum_radius = double(R_enum_cand);
    rep.coeff_abs_sum = chain[k - 1].abs_sum;
    rep.grid_min_g = std::numeric_limits<double>::infinity();

    Convolver conv;

    for (int oy = 0; oy < 4; ++oy) {
        for (int ox = 0; ox < 4; ++ox) {
            const std::int64_t chi_R = std::min(r_chi, k > 1 ? need[0] : R_grid + R_enum_cand);
            Plane plane = chi0_plane(ctx.window, ox, oy, chi_R);
            for (std::size_t j = 0; j + 1 < k; ++j)
                plane = conv.convolve(plane, chain[j].coeffs, chain[j].eval_radius);
            if (ox == 0 && oy == 0) rep.mu_prev_zero = plane.at(0, 0);
            Plane D = conv.convolve(plane, chain[k - 1].coeffs, R_grid);
            if (ox == 0 && oy == 0) rep.mu_zero = rep.mu_prev_zero + D.at(0, 0);

            for (std::int64_t y = -R_grid; y <= R_grid; ++y) {
                const double xiy = double(y) + double(oy) / 4.0;
                if (std::fabs(xiy) > double(R_grid)) continue;
                for (std::int64_t x = -R_grid; x <= R_grid; ++x) {
                    const double xix = double(x) + double(ox) / 4.0;
                    if (std::fabs(xix) > double(R_grid)) continue;
                    const double g = g_weight(std::max(std::fabs(xix), std::fabs(xiy)), ctx.a, ctx.variant);
                    const double ratio = std::abs(D.at(x, y)) / g;
                    rep.grid_min_g = std::min(rep.grid_min_g, g);
                    ++rep.grid_points;
                    if (ratio > rep.grid_margin) {
                        rep.grid_margin = ratio;
                        rep.grid_argmax = Vec2{xix, xiy};
                    }
                }
            }
        }
    }

    // truncation-tail decomposition, composed through the chain
    double rig = 1e-10;   // lump for the chi0 plane floor and FFT roundoff
    double model = 0.0;
    double beta_level = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const FMParams params = (j + 1 < k) ? spec.stage_params(j + 1) : cand;
        TailSetup ts{params.eps, params.M, double(params.ann.members.size()),
                     params.bump.envelope_const(), spec.window.bump.K};
        const double eval_r = double(chain[j].eval_radius);
        const double own_rig = tail_chi0_series(ts, chain[j].R_enum, eval_r,
                                                ctx.window.scale(), spec.window.bump.K);
        const double own_model = tail_model_series(ts, chain[j].R_enum, eval_r, beta_level,
                                                   ctx.a, ctx.variant);
        const double amp = 1.0 + chain[j].abs_sum;
        rig = amp * rig + own_rig;
        model = amp * model + own_model;
        beta_level += (j + 1 < k) ? spec.stages[j].delta : delta;
    }
    rep.tail_chi0 = rig;
    rep.tail_model_g = model;

    CandidateOutcome out;
    out.report = rep;
    out.grid_pass = rep.grid_margin <= delta;
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// point evaluator

struct MeasureEvaluator::Impl {
    MeasureSpec spec;
    Window window;
    std::vector<FMParams> params;
    GVariant variant;
    double a = 0.0;

    // dense local coefficient blocks for the inner levels (reused across all
    // sample points), and a hash cache for outer-level coefficients
    std::vector<Plane> inner_blocks;
    mutable std::vector<std::unordered_map<std::uint64_t, std::complex<double>>> coeff_cache;
    mutable std::mutex cache_mu;

    // per-level tail numbers at the configured point radii
    std::vector<double> tail_rig_level, tail_model_level;

    explicit Impl(MeasureSpec s)
        : spec(std::move(s)), window(spec.window) {
        variant = g_variant_for(spec.mode);
        a = spec.a();
        for (std::size_t j = 1; j <= spec.stages.size(); ++j)
            params.push_back(spec.stage_params(j));
        coeff_cache.resize(params.size());
        while (spec.trunc_radii.size() < spec.stages.size())
            spec.trunc_radii.push_back(spec.trunc_radii.empty() ? 40.0 : spec.trunc_radii.back());

        const std::size_t k = spec.stages.size();
        inner_blocks.reserve(k);
        for (std::size_t j = 0; j < k; ++j) {
            // level j+1 coefficients are consumed at lattice distance up to
            // r_{j+1} + r_{j+2} from the origin for inner levels
            if (j + 1 < k) {
                const std::int64_t R = std::llround(spec.trunc_radii[j] + spec.trunc_radii[j + 1]) + 1;
                CoeffTable t(params[j], R);
                inner_blocks.push_back(table_plane(t, false));
            } else {
                inner_blocks.emplace_back(0);   // outer level served by the cache
            }
        }

        for (std::size_t j = 0; j < k; ++j) {
            TailSetup ts{params[j].eps, params[j].M, double(params[j].ann.members.size()),
                         params[j].bump.envelope_const(), spec.window.bump.K};
            const double r = spec.trunc_radii[j];
            // distance-truncated discard: coefficient magnitudes up to max,
            // previous-envelope decay beyond r
            double rig = 0.0;
            for (double n = std::floor(r); n < 1e6; n += 1.0) {
                const double term = 12.0 * (n + 1.0) *
                                    ts.axis_env * std::pow(1.0 + window.scale() * n, -double(spec.window.bump.K + 1));
                rig += term;
                if (term < 1e-22 * (rig + 1e-300) && n > r + 64) break;
            }
            double beta_prev = 0.0;
            for (std::size_t i = 0; i < j; ++i) beta_prev += spec.stages[i].delta;
            tail_rig_level.push_back(rig);
            tail_model_level.push_back(beta_prev > 0 ? beta_prev * g_weight(std::max(r, 3.0), a, variant) *
                                                           (1.0 + inner_sum_bound(j))
                                                     : 0.0);
        }
    }

    double inner_sum_bound(std::size_t j) const {
        // coarse coefficient-mass factor for the recorded model tail
        return 24.0 * spec.trunc_radii[j] * spec.trunc_radii[j] /
               std::max(1.0, double(params[j].ann.members.size())) * 8.0;
    }

    std::complex<double> coeff(std::size_t level, GaussInt l) const {
        if (is_zero(l)) return {1.0, 0.0};
        const Plane& block = inner_blocks[level];
        if (block.R > 0 && std::llabs(l.re) <= block.R && std::llabs(l.im) <= block.R)
            return block.at(l.re, l.im);
        const std::uint64_t key = (std::uint64_t(std::uint32_t(l.re)) << 32) | std::uint64_t(std::uint32_t(l.im));
        {
            std::lock_guard lock(cache_mu);
            auto it = coeff_cache[level].find(key);
            if (it != coeff_cache[level].end()) return it->second;
        }
        const std::complex<double> c = fm_coeff(params[level], l);
        std::lock_guard lock(cache_mu);
        coeff_cache[level].emplace(key, c);
        return c;
    }

    // G_j[w] = mu-hat_j(frac + w) on |w| <= radius, shared fractional part
    std::vector<std::complex<double>> level_grid(std::size_t j, Vec2 frac, std::int64_t radius) const {
        const std::int64_t side = 2 * radius + 1;
        std::vector<std::complex<double>> out(std::size_t(side) * std::size_t(side));
        if (j == 0) {
            const std::size_t n_side = std::size_t(side);
            std::vector<std::complex<double>> axx(n_side), axy(n_side);
            const double sc = window.scale();
            const Vec2 c = window.spec().center;
            for (std::int64_t m = -radius; m <= radius; ++m) {
                const double tx = frac.x + double(m);
                const double ty = frac.y + double(m);
                const double angx = -2.0 * M_PI * tx * c.x;
                const double angy = -2.0 * M_PI * ty * c.y;
                axx[std::size_t(m + radius)] =
                    window.bump().phi_hat1(sc * tx) * std::complex<double>{std::cos(angx), std::sin(angx)};
                axy[std::size_t(m + radius)] =
                    window.bump().phi_hat1(sc * ty) * std::complex<double>{std::cos(angy), std::sin(angy)};
            }
            for (std::int64_t y = -radius; y <= radius; ++y)
                for (std::int64_t x = -radius; x <= radius; ++x)
                    out[std::size_t(y + radius) * std::size_t(side) + std::size_t(x + radius)] =
                        axx[std::size_t(x + radius)] * axy[std::size_t(y + radius)];
            return out;
        }
        const std::int64_t r_in = std::llround(spec.trunc_radii[j - 1]);
        const auto inner = level_grid(j - 1, frac, r_in);
        const std::int64_t in_side = 2 * r_in + 1;
        const Plane& block = inner_blocks[j - 1];
        for (std::int64_t ny = -radius; ny <= radius; ++ny) {
            for (std::int64_t nx = -radius; nx <= radius; ++nx) {
                std::complex<double> acc{0.0, 0.0};
                for (std::int64_t wy = -r_in; wy <= r_in; ++wy) {
                    const std::complex<double>* inner_row =
                        inner.data() + std::size_t(wy + r_in) * std::size_t(in_side);
                    for (std::int64_t wx = -r_in; wx <= r_in; ++wx) {
                        const std::complex<double> in_v = inner_row[std::size_t(wx + r_in)];
                        if (in_v.real() == 0.0 && in_v.imag() == 0.0) continue;
                        const std::complex<double> c = (block.R > 0 &&
                                                        std::llabs(nx - wx) <= block.R &&
                                                        std::llabs(ny - wy) <= block.R)
                                                           ? block.at(nx - wx, ny - wy)
                                                           : coeff(j - 1, GaussInt{nx - wx, ny - wy});
                        if (c.real() != 0.0 || c.imag() != 0.0) acc += c * in_v;
                    }
                }
                out[std::size_t(ny + radius) * std::size_t(side) + std::size_t(nx + radius)] = acc;
            }
        }
        return out;
    }
};

MeasureEvaluator::MeasureEvaluator(MeasureSpec spec) : impl_(std::make_unique<Impl>(std::move(spec))) {}
MeasureEvaluator::~MeasureEvaluator() = default;
MeasureEvaluator::MeasureEvaluator(MeasureEvaluator&&) noexcept = default;

const MeasureSpec& MeasureEvaluator::spec() const { return impl_->spec; }

MeasureEvaluator::TransformValue MeasureEvaluator::transform(int k, Vec2 xi, double tol) const {
    if (k < 0 || std::size_t(k) > impl_->spec.stages.size())
        throw domain_error("transform: stage index exceeds accepted stages");
    TransformValue out;
    if (k == 0) {
        out.value = impl_->window.chi_hat(xi);
        return out;
    }
    const Vec2 n{std::floor(xi.x + 0.5), std::floor(xi.y + 0.5)};
    const Vec2 frac = xi - n;
    const GaussInt n_i{std::int64_t(std::llround(n.x)), std::int64_t(std::llround(n.y))};

    const std::int64_t r_out = std::llround(impl_->spec.trunc_radii[std::size_t(k - 1)]);
    std::vector<std::complex<double>> grid = impl_->level_grid(std::size_t(k - 1), frac, r_out);
    const std::int64_t side = 2 * r_out + 1;
    std::complex<double> acc{0.0, 0.0};
    for (std::int64_t wy = -r_out; wy <= r_out; ++wy) {
        for (std::int64_t wx = -r_out; wx <= r_out; ++wx) {
            const std::complex<double> in_v =
                grid[std::size_t(wy + r_out) * std::size_t(side) + std::size_t(wx + r_out)];
            if (in_v.real() == 0.0 && in_v.imag() == 0.0) continue;
            const GaussInt l{n_i.re - wx, n_i.im - wy};
            const std::complex<double> c = impl_->coeff(std::size_t(k - 1), l);
            if (c.real() != 0.0 || c.imag() != 0.0) acc += c * in_v;
        }
    }
    out.value = acc;
    for (int j = 0; j < k; ++j) {
        out.tail_chi0 += impl_->tail_rig_level[std::size_t(j)];
        out.tail_model_g += impl_->tail_model_level[std::size_t(j)];
    }
    if (tol > 0.0 && out.tail_chi0 > tol)
        throw truncation_insufficient("transform: rigorous truncation component exceeds tolerance",
                                      out.tail_chi0, tol);
    return out;
}

double MeasureEvaluator::density(Vec2 x) const {
    double d = impl_->window.chi(x);
    for (const FMParams& p : impl_->params) {
        if (d == 0.0) return 0.0;
        d *= fm_eval(p, x);
    }
    return d;
}

// ---------------------------------------------------------------------------
// search and build

namespace {

Vec2 sup_circle_point(double s, double angle) {
    const double c = std::cos(angle), n = std::sin(angle);
    const double m = std::max(std::fabs(c), std::fabs(n));
    return {s * c / m, s * n / m};
}

double band_margin_check(const MeasureSpec& spec_with_candidate, const BuildOptions& opt,
                         double R_check, double a, GVariant variant) {
    const int k = int(spec_with_candidate.stages.size());
    MeasureEvaluator eval(spec_with_candidate);
    double worst = 0.0;
    constexpr double golden = 0.6180339887498949;
    for (int i = 0; i < opt.band_samples; ++i) {
        const double u = (i + 0.5) / double(opt.band_samples);
        const double s = R_check * std::pow(opt.band_factor, u);
        const double ang = 2.0 * M_PI * std::fmod(golden * (i + 1), 1.0);
        const Vec2 xi = sup_circle_point(s, ang);
        const auto hi = eval.transform(k, xi);
        const auto lo = eval.transform(k - 1, xi);
        const double ratio = std::abs(hi.value - lo.value) / g_weight(xi, a, variant);
        worst = std::max(worst, ratio);
    }
    return worst;
}

} // namespace

MStarResult find_M_star(double delta, double M0, const MeasureSpec& spec_so_far,
                        const BuildOptions& options) {
    if (!(delta > 0)) throw domain_error("find_M_star: delta must be positive");
    if (!(M0 > 0)) throw domain_error("find_M_star: M0 must be positive");
    CandidateContext ctx{&spec_so_far, &options, Window(spec_so_far.window),
                         g_variant_for(spec_so_far.mode), spec_so_far.a()};

    const bool trace = std::getenv("SALEM2D_TRACE") != nullptr;
    double best_margin = std::numeric_limits<double>::infinity();
    double best_candidate = 0.0;
    for (double M = M0; M <= options.search_cap; M *= 2.0) {
        if (spec_so_far.mode == AnnulusMode::all && M < 2) continue;
        if (spec_so_far.mode == AnnulusMode::primes && M < 4) continue;
        CandidateOutcome out;
        try {
            out = check_candidate(ctx, delta, M);
        } catch (const domain_error& e) {
            // candidate exceeded a desk-scale resource guard; report the search
            throw search_failure(std::string("find_M_star: candidate infeasible (") + e.what() +
                                     ")",
                                 best_margin, best_candidate);
        }
        if (out.grid_pass) {
            MeasureSpec with = spec_so_far;
            with.stages.push_back({M, delta, out.report});
            out.report.band_hi = options.band_factor * out.report.R_check;
            out.report.band_margin = band_margin_check(with, options, out.report.R_check,
                                                       ctx.a, ctx.variant);
        }
        if (trace)
            std::fprintf(stderr,
                         "candidate M=%g delta=%g grid_margin=%.6g argmax=(%g,%g) band=%.6g%s\n",
                         M, delta, out.report.grid_margin, out.report.grid_argmax.x,
                         out.report.grid_argmax.y, out.report.band_margin,
                         out.grid_pass ? " grid-pass" : "");
        if (out.grid_pass && out.report.band_margin <= delta) return {M, out.report};
        const double m = std::max(out.report.grid_margin, out.report.band_margin);
        if (m < best_margin) {
            best_margin = m;
            best_candidate = M;
        }
    }
    throw search_failure("find_M_star: no candidate accepted up to the search cap",
                         best_margin, best_candidate);
}

BuildResult build_measure(const WindowSpec& window, double tau, AnnulusMode mode,
                          int k_max, const BuildOptions& options) {
    if (k_max < 1 || k_max > 3)
        throw domain_error("build_measure: k_max must be in [1, 3]");
    if (mode == AnnulusMode::custom)
        throw domain_error("build_measure: custom populations are not supported in the staged build");

    MeasureSpec spec;
    spec.window = window;
    spec.tau = tau;
    spec.mode = mode;
    spec.trunc_radii = options.trunc_radii;

    double delta = options.delta0;
    double M0 = options.M0;
    for (int k = 1; k <= k_max; ++k) {
        MStarResult res = find_M_star(delta, M0, spec, options);
        spec.stages.push_back({res.M_star, delta, res.report});
        M0 = 2.0 * res.M_star;
        delta *= 0.5;
    }

    // telescoped deviation |mu_k - mu_0| <= (sum delta_j) g on the final grid
    BuildDiagnostics diag;
    {
        const Window win(spec.window);
        const GVariant variant = g_variant_for(spec.mode);
        const double a = spec.a();
        const std::int64_t R_grid = std::llround(spec.stages.back().report.R_check);
        const std::int64_t margin = std::llround(options.enum_margin);
        const std::size_t k = spec.stages.size();
        std::vector<std::int64_t> need(k), renum(k);
        renum[k - 1] = R_grid + margin;
        for (std::size_t j = k - 1; j >= 1; --j) {
            need[j - 1] = (j == k - 1 ? R_grid : need[j]) + renum[j];
            renum[j - 1] = need[j - 1] + margin;
        }
        std::vector<ChainLevel> chain;
        for (std::size_t j = 0; j < k; ++j)
            chain.push_back(make_level(spec.stage_params(j + 1), renum[j],
                                       j + 1 < k ? need[j] : R_grid, false));
        Convolver conv;
        const std::int64_t r_chi = std::llround(std::ceil(win.effective_radius(1e-14)));
        for (int oy = 0; oy < 4; ++oy) {
            for (int ox = 0; ox < 4; ++ox) {
                Plane plane = chi0_plane(win, ox, oy,
                                         std::min(r_chi, k > 1 ? need[0] : R_grid + renum[0]));
                for (std::size_t j = 0; j < k; ++j)
                    plane = conv.convolve(plane, chain[j].coeffs, chain[j].eval_radius);
                if (ox == 0 && oy == 0) diag.mu_hat_zero = plane.at(0, 0);
                for (std::int64_t y = -R_grid; y <= R_grid; ++y) {
                    const double xiy = double(y) + double(oy) / 4.0;
                    if (std::fabs(xiy) > double(R_grid)) continue;
                    for (std::int64_t x = -R_grid; x <= R_grid; ++x) {
                        const double xix = double(x) + double(ox) / 4.0;
                        if (std::fabs(xix) > double(R_grid)) continue;
                        const Vec2 xi{xix, xiy};
                        const std::complex<double> mu0 = win.chi_hat(xi);
                        const double ratio = std::abs(plane.at(x, y) - mu0) /
                                             g_weight(xi, a, variant);
                        if (ratio > diag.telescope_max_ratio) {
                            diag.telescope_max_ratio = ratio;
                            diag.telescope_argmax = xi;
                        }
                    }
                }
            }
        }
    }
    return {spec, diag};
}

DecayReport decay_scan(const MeasureEvaluator& eval, int n_shells, int samples_per_shell) {
    if (eval.spec().stages.empty()) throw domain_error("decay_scan: spec has no stages");
    if (n_shells < 1 || samples_per_shell < 1)
        throw domain_error("decay_scan: shells and samples must be positive");
    const double a = eval.spec().a();
    const GVariant variant = g_variant_for(eval.spec().mode);
    const int k = int(eval.spec().stages.size());
    DecayReport report;
    constexpr double alpha1 = 0.7548776662466927;   // 2-D low-discrepancy increments
    constexpr double alpha2 = 0.5698402909980532;
    for (int j = 0; j < n_shells; ++j) {
        DecayShell shell;
        shell.lo = std::pow(2.0, j);
        shell.hi = std::pow(2.0, j + 1);
        for (int i = 0; i < samples_per_shell; ++i) {
            const double u1 = std::fmod(0.5 + alpha1 * (i + 1), 1.0);
            const double u2 = std::fmod(0.5 + alpha2 * (i + 1), 1.0);
            const double s = shell.lo + (shell.hi - shell.lo) * u1;
            const Vec2 xi = sup_circle_point(s, 2.0 * M_PI * u2);
            const double ratio = std::abs(eval.transform(k, xi).value) / g_weight(xi, a, variant);
            ++shell.samples;
            if (ratio > shell.max_ratio) {
                shell.max_ratio = ratio;
                shell.argmax = xi;
            }
        }
        report.shells.push_back(shell);
    }
    return report;
}

} // namespace salem2d
