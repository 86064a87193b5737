#pragma once

// Quadrature oracle for the lattice Fourier coefficients: tensor
// Gauss-Legendre integration of F_M(x) e^{-2 pi i <l, x>} over [0,1]^2,
// computed purely from point evaluation of the annulus average (never from
// the divisor formula). For speed the per-row sweep enumerates the support
// intervals of each annulus term instead of testing every sample.

#include <cmath>
#include <complex>
#include <vector>

#include "salem2d/bump.hpp"
#include "salem2d/fm.hpp"

namespace fm_oracle {

struct CoeffGrid {
    int l_max = 0;
    std::vector<std::complex<double>> c;   // (2*l_max+1)^2, row-major by l_im then l_re

    std::complex<double> at(std::int64_t l_re, std::int64_t l_im) const {
        const std::size_t side = std::size_t(2 * l_max + 1);
        return c[std::size_t(l_im + l_max) * side + std::size_t(l_re + l_max)];
    }
};

struct Samples1D {
    std::vector<double> y;
    std::vector<double> w;
    int panels = 0;
    int nodes = 0;
};

inline Samples1D unit_samples(int panels, int nodes) {
    Samples1D s;
    s.panels = panels;
    s.nodes = nodes;
    const auto& [gx, gw] = salem2d::gauss_legendre(nodes);
    const double h = 1.0 / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) * h;
        for (int i = 0; i < nodes; ++i) {
            s.y.push_back(mid + 0.5 * h * gx[std::size_t(i)]);
            s.w.push_back(0.5 * h * gw[std::size_t(i)]);
        }
    }
    return s;
}

// accumulates (1/|ann|) sum_q Phi^eps(q(x,y) - theta) over the row samples
inline void accumulate_row(const salem2d::FMParams& params, double x,
                           const Samples1D& s, std::vector<double>& row) {
    const double eps = params.eps;
    const double inv_eps = 1.0 / eps;
    const salem2d::Bump& bump = params.bump;
    const int deg = params.bump.spec().K + 1;
    const double c1 = bump.axis_norm_const();
    const double unit = c1 * c1 * inv_eps * inv_eps / double(params.ann.members.size());
    const auto poly = [deg](double t) {
        const double u = 1.0 - t * t;
        if (u <= 0.0) return 0.0;
        double p = 1.0;
        for (int j = 0; j < deg; ++j) p *= u;
        return p;
    };
    const int per_panel = s.nodes;
    const double panel_w = 1.0 / s.panels;

    auto test_sample = [&](std::size_t j, double qre, double qim, double yx0, double yy0) {
        const double y = s.y[j];
        const double t1 = yx0 - qim * y;
        const double u1 = t1 - std::nearbyint(t1);
        if (std::fabs(u1) >= eps) return;
        const double t2 = yy0 + qre * y;
        const double u2 = t2 - std::nearbyint(t2);
        if (std::fabs(u2) >= eps) return;
        row[j] += unit * poly(u1 * inv_eps) * poly(u2 * inv_eps);
    };

    for (const salem2d::GaussInt& q : params.ann.members) {
        const double qre = double(q.re), qim = double(q.im);
        const double yx0 = qre * x - params.theta.x;
        const double yy0 = qim * x - params.theta.y;
        if (q.im == 0) {
            const double u1 = yx0 - std::nearbyint(yx0);
            if (std::fabs(u1) >= eps) continue;
            for (std::size_t j = 0; j < s.y.size(); ++j) test_sample(j, qre, qim, yx0, yy0);
            continue;
        }
        // support intervals of |yx0 - qim*y - k| <= eps within y in [0,1)
        const double t_at0 = yx0, t_at1 = yx0 - qim;
        const double t_lo = std::min(t_at0, t_at1) - eps, t_hi = std::max(t_at0, t_at1) + eps;
        for (double k = std::ceil(t_lo); k <= std::floor(t_hi); k += 1.0) {
            double a = (yx0 - k - eps) / qim;
            double b = (yx0 - k + eps) / qim;
            if (a > b) std::swap(a, b);
            a = std::max(a, 0.0);
            b = std::min(b, 1.0);
            if (a >= b) continue;
            const int p_lo = std::max(0, int(a / panel_w));
            const int p_hi = std::min(s.panels - 1, int(b / panel_w));
            for (int p = p_lo; p <= p_hi; ++p)
                for (int i = 0; i < per_panel; ++i)
                    test_sample(std::size_t(p * per_panel + i), qre, qim, yx0, yy0);
        }
    }
}

inline CoeffGrid coefficients(const salem2d::FMParams& params, int l_max, int panels,
                              int nodes = 10) {
    const Samples1D s = unit_samples(panels, nodes);
    const std::size_t n = s.y.size();
    const int side = 2 * l_max + 1;
    CoeffGrid grid;
    grid.l_max = l_max;
    grid.c.assign(std::size_t(side) * std::size_t(side), {0.0, 0.0});

    // characters along one axis, per frequency
    const std::size_t n_side = std::size_t(side);
    std::vector<std::vector<std::complex<double>>> chars(n_side);
    for (int l = -l_max; l <= l_max; ++l) {
        auto& v = chars[std::size_t(l + l_max)];
        v.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = -2.0 * M_PI * l * s.y[j];
            v[j] = {std::cos(ang), std::sin(ang)};
        }
    }

    std::vector<double> row(n);
    std::vector<std::complex<double>> g(n_side);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(row.begin(), row.end(), 0.0);
        accumulate_row(params, s.y[i], s, row);
        for (int l2 = -l_max; l2 <= l_max; ++l2) {
            std::complex<double> acc{0.0, 0.0};
            const auto& ch = chars[std::size_t(l2 + l_max)];
            for (std::size_t j = 0; j < n; ++j)
                if (row[j] != 0.0) acc += s.w[j] * row[j] * ch[j];
            g[std::size_t(l2 + l_max)] = acc;
        }
        const double wi = s.w[i];
        for (int l1 = -l_max; l1 <= l_max; ++l1) {
            const double ang = -2.0 * M_PI * l1 * s.y[i];
            const std::complex<double> ph{std::cos(ang), std::sin(ang)};
            for (int l2 = -l_max; l2 <= l_max; ++l2)
                grid.c[std::size_t(l2 + l_max) * std::size_t(side) + std::size_t(l1 + l_max)] +=
                    wi * ph * g[std::size_t(l2 + l_max)];
        }
    }
    return grid;
}

} // namespace fm_oracle
