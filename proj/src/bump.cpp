#include "salem2d/bump.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <unordered_map>

namespace salem2d {

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        // Newton from the Chebyshev-based initial guess
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / dp;
            t -= dt;
            if (std::fabs(dt) < 1e-15) break;
        }
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double dp = n * (t * p1 - p0) / (t * t - 1.0);
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    return cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first->second;
}

Bump::Bump(BumpSpec spec) : spec_(spec) {
    if (spec_.K < 1 || spec_.K > 20)
        throw domain_error("Bump: K must be in [1, 20]");
    if (!(spec_.quad_tol > 0))
        throw domain_error("Bump: quad_tol must be positive");
    // int_{-1}^{1} (1-u^2)^n du = 2 * prod_{j=1..n} 2j/(2j+1)
    const int n = spec_.K + 1;
    long double I = 2.0L;
    for (int j = 1; j <= n; ++j) I *= (2.0L * j) / (2.0L * j + 1.0L);
    c1_ = double(1.0L / I);
}

double Bump::phi1(double t) const {
    const double s = 1.0 - t * t;
    if (s <= 0.0) return 0.0;
    double p = 1.0;
    for (int j = 0; j < spec_.K + 1; ++j) p *= s;
    return c1_ * p;
}

double Bump::phi(Vec2 x) const { return phi1(x.x) * phi1(x.y); }

double Bump::transform_quadrature(double t) const {
    // phi_hat1(t) = 2 c1 int_0^1 (1-u^2)^{K+1} cos(2 pi t u) du,
    // composite panels with the count tied to the oscillation scale.
    const auto& [nodes, weights] = gauss_legendre(12);
    const double envelope = std::pow(1.0 + std::fabs(t), -double(spec_.K + 2));
    int panels = 4 + int(std::ceil(std::fabs(t) / 4.0));
    double prev = 0.0;
    for (int rung = 0; rung < 8; ++rung, panels *= 2) {
        double acc = 0.0;
        const double h = 1.0 / panels;
        for (int p = 0; p < panels; ++p) {
            const double mid = (p + 0.5) * h;
            double local = 0.0;
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                const double u = mid + 0.5 * h * nodes[i];
                const double s = 1.0 - u * u;
                double poly = 1.0;
                for (int j = 0; j < spec_.K + 1; ++j) poly *= s;
                local += weights[i] * poly * std::cos(2.0 * M_PI * t * u);
            }
            acc += local * 0.5 * h;
        }
        acc *= 2.0 * c1_;
        const double thresh =
            std::max(spec_.quad_tol * std::max(std::fabs(acc), envelope), 1e-15);
        if (rung > 0 && std::fabs(acc - prev) <= thresh) return acc;
        prev = acc;
    }
    throw numeric_error("phi_hat quadrature did not converge at t=" + std::to_string(t));
}

double Bump::phi_hat1(double t) const {
    if (t == 0.0) return 1.0;
    t = std::fabs(t);
    // replicated per-thread read-through cache keyed by the exact argument
    thread_local std::unordered_map<std::uint64_t, double> memo;
    const std::uint64_t key = std::bit_cast<std::uint64_t>(t) ^ (std::uint64_t(spec_.K) << 56);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    const double v = transform_quadrature(t);
    if (memo.size() > (1u << 22)) memo.clear();
    memo.emplace(key, v);
    return v;
}

double Bump::phi_hat(Vec2 xi) const { return phi_hat1(xi.x) * phi_hat1(xi.y); }

double Bump::phi_eps(double eps, Vec2 x) const {
    if (!(eps > 0)) throw domain_error("phi_eps: eps must be positive");
    return phi(Vec2{x.x / eps, x.y / eps}) / (eps * eps);
}

double Bump::periodized(double eps, Vec2 x) const {
    if (!(eps > 0)) throw domain_error("periodized: eps must be positive");
    // translates within sup-distance eps of x can contribute
    const std::int64_t rx_lo = std::int64_t(std::ceil(x.x - eps));
    const std::int64_t rx_hi = std::int64_t(std::floor(x.x + eps));
    const std::int64_t ry_lo = std::int64_t(std::ceil(x.y - eps));
    const std::int64_t ry_hi = std::int64_t(std::floor(x.y + eps));
    double acc = 0.0;
    for (std::int64_t rx = rx_lo; rx <= rx_hi; ++rx)
        for (std::int64_t ry = ry_lo; ry <= ry_hi; ++ry)
            acc += phi_eps(eps, Vec2{x.x - double(rx), x.y - double(ry)});
    return acc;
}

double Bump::envelope_const() const {
    static std::mutex mu;
    static std::map<std::pair<int, std::uint64_t>, double> cache;
    const auto key = std::make_pair(spec_.K, std::bit_cast<std::uint64_t>(spec_.quad_tol));
    {
        std::lock_guard lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    // scan-pinned envelope for |phi_hat1(t)| (1+t)^{K+1}; values below the
    // quadrature noise floor are excluded (the true transform keeps decaying
    // one power faster, so the sup sits at moderate t)
    double c = 1.0;
    for (double t = 0.25; t <= 512.0; t *= 1.05) {
        const double v = std::fabs(phi_hat1(t));
        if (v < 1e-12) continue;
        c = std::max(c, v * std::pow(1.0 + t, double(spec_.K + 1)));
    }
    c *= 1.05;
    std::lock_guard lock(mu);
    cache.emplace(key, c);
    return c;
}

std::vector<double> Bump::axis_table(double eps, std::int64_t n_max) const {
    std::vector<double> tab(std::size_t(n_max) + 1);
    for (std::int64_t n = 0; n <= n_max; ++n) tab[std::size_t(n)] = phi_hat1(eps * double(n));
    return tab;
}

} // namespace salem2d
