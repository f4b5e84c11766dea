#pragma once
// Independent reference computations for the tests. Nothing in here calls the
// library's pricing code; each function is written from the textbook form.

#include <cstddef>
#include <vector>

#include "cirdiff/core_model.hpp"
#include "cirdiff/marketdata.hpp"

namespace oracle {

// Published calibration results for two valuation dates.
struct ReferenceCalibration {
    const char* date;
    double phi1x, phi2x, phi3x, x0;
    double phi1y, phi2y, phi3y, y0;
    double objective;
    double mre;  // decimal
    double kx, sigmax, thetax;
    double ky, sigmay, thetay;

    cirdiff::DiffModel model() const {
        return {{kx, sigmax, thetax, x0}, {ky, sigmay, thetay, y0}};
    }
};

inline constexpr ReferenceCalibration kRef2019{
    "2019-12-30", 0.710501, 0.644564, 1.60862, 0.268914, 0.468673, 0.533206, 1.50249, 0.280095,
    3.247465e-04, 0.00144, 0.578626, 0.291551, 0.118155, 0.59774, 0.262334, 0.0864925};
inline constexpr ReferenceCalibration kRef2020{
    "2020-11-30", 0.767497, 0.699649, 1.6014, 0.257145, 0.523363, 0.594629, 1.49966, 0.270007,
    3.548162e-04, 0.00138, 0.631802, 0.308122, 0.120319, 0.665895, 0.291125, 0.0954364};

struct Factors {
    double a = 1.0;
    double b = 0.0;
};

/// Standard CIR bond factors with h = sqrt(k^2 + 2 sigma^2):
///   A = (2h e^{(k+h)tau/2} / (2h + (k+h)(e^{h tau} - 1)))^{2 k theta / sigma^2}
///   B = 2 (e^{h tau} - 1) / (2h + (k+h)(e^{h tau} - 1))
Factors textbook_cir(double k, double sigma, double theta, double tau);

/// Classical RK4 on the Riccati system in time-to-maturity,
///   x: B' = 1 - k B - sigma^2 B^2 / 2,  (log A)' = -k theta B
///   y: B' = 1 - k B + sigma^2 B^2 / 2,  (log A)' = +k theta B
/// from B = log A = 0, with the given step.
Factors riccati_rk4(double k, double sigma, double theta, cirdiff::Leg leg, double tau, double h = 1e-4);

/// Quotes consistent with a flat continuously compounded rate c: deposits
/// (e^{cT} - 1) / T and annual-pay par swap rates by direct summation.
cirdiff::QuoteSet flat_quotes(double c, const std::vector<double>& deposit_tenors,
                              const std::vector<double>& swap_tenors);

/// Forward par rate on a flat curve by direct summation over whole-year dates.
double flat_par_rate(double c, double start, int tenor_years);
double flat_annuity(double c, double start, int tenor_years);

/// Noiseless Euler recursion z_{i+1} = z_i + k (theta - z_i) delta.
std::vector<double> euler_ode_path(double k, double theta, double z0, double delta, std::size_t steps);

/// z0 e^{-kt} + theta (1 - e^{-kt}).
double ode_solution(double k, double theta, double z0, double t);

/// Bachelier payer price by Simpson quadrature of the payoff against the
/// normal density (independent of the closed form).
double bachelier_payer_quadrature(double forward, double strike, double vol, double expiry, double annuity);

/// Market discount curve priced by the model itself at the given pillars.
cirdiff::ZeroCurve model_curve(const cirdiff::DiffModel& m, const std::vector<double>& maturities);

/// Pillar set used for synthetic calibration curves.
std::vector<double> standard_pillars();

}  // namespace oracle
