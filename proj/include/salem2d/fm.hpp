#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "salem2d/bump.hpp"
#include "salem2d/gauss.hpp"

namespace salem2d {

// One averaged-dilation operator F_M: annulus population, approximation
// speed eps, and the bump it periodizes. theta/psi select the generalized
// variant; the defaults reproduce the standard operator.
struct FMParams {
    double M = 0.0;
    double tau = 0.0;
    AnnulusMode mode = AnnulusMode::all;
    std::vector<GaussInt> custom_Q;
    Vec2 theta{0.0, 0.0};
    std::function<double(GaussInt)> psi;   // null: q -> sup_norm(q)^{-tau}
    Bump bump;

    // derived at construction
    double a = 0.0;       // 2/(1+tau)
    double eps = 0.0;     // (1/2) M^{-tau}, or min psi over the annulus
    Annulus ann;

    bool generalized() const { return theta.x != 0.0 || theta.y != 0.0; }
};

// Validates preconditions (tau > 0 unless a custom psi is given, K > 2 + a,
// nonempty annulus, eps < 1/2) and fills the derived fields.
FMParams make_fm_params(double M, double tau, AnnulusMode mode = AnnulusMode::all,
                        BumpSpec bump = {}, Vec2 theta = {0.0, 0.0},
                        std::function<double(GaussInt)> psi = nullptr,
                        std::vector<GaussInt> custom_Q = {});

// Point evaluation of the annulus average of periodized bumps at qx - theta.
double fm_eval(const FMParams& params, Vec2 x);

// Exact lattice Fourier coefficient via the divisor-restricted sum;
// special-cased to 1 at l = 0.
std::complex<double> fm_coeff(const FMParams& params, GaussInt ell);

// Annulus members dividing conj(l); l must be nonzero.
std::vector<GaussInt> annulus_coeff_population(const FMParams& params, GaussInt ell);

namespace detail {
// Forced generalized accumulation (phase factors included even at theta = 0);
// used to check that the standard path is a bit-exact specialization.
std::complex<double> fm_coeff_general(const FMParams& params, GaussInt ell);
}

// Shell statistics of |coeff| * sup_norm(l)^a / weight(l) where the weight is
// exp(zeta ln|l| / ln ln|l|) in mode=all and ln|l| in mode=primes.
struct ShellRow {
    double lo = 0.0;            // exclusive
    double hi = 0.0;            // inclusive
    double max_ratio = 0.0;
    GaussInt argmax;
    std::uint64_t count = 0;
};
struct ShellScanTable {
    std::vector<ShellRow> rows;
    double zeta = 1.0;
    double max_ratio = 0.0;
};
ShellScanTable fm_coeff_bound_check(const FMParams& params, std::int64_t L_max,
                                    double zeta = 1.0);

// Dense coefficient table over the integer box |l|_inf <= radius, for the
// staged-measure machinery. Entries are exact divisor sums; the zero mode is
// included (value 1).
class CoeffTable {
  public:
    CoeffTable(const FMParams& params, std::int64_t radius);

    std::int64_t radius() const { return radius_; }
    std::complex<double> at(std::int64_t re, std::int64_t im) const {
        if (std::llabs(re) > radius_ || std::llabs(im) > radius_) return {0.0, 0.0};
        return data_[index(re, im)];
    }
    double abs_sum() const { return abs_sum_; }            // zero mode excluded
    double max_abs_nonzero_mode() const { return max_abs_; }
    const std::vector<std::complex<double>>& data() const { return data_; }
    std::size_t index(std::int64_t re, std::int64_t im) const {
        return std::size_t(im + radius_) * std::size_t(2 * radius_ + 1) + std::size_t(re + radius_);
    }

  private:
    std::int64_t radius_;
    std::vector<std::complex<double>> data_;
    double abs_sum_ = 0.0;
    double max_abs_ = 0.0;
};

} // namespace salem2d
