#pragma once
//
// Closed-form quantities of the CIR-difference short-rate model
//
//   dx = k_x (theta_x - x) dt + sigma_x sqrt(x) dW_x
//   dy = k_y (theta_y - y) dt + sigma_y sqrt(y) dW_y,   W_x independent of W_y
//   r  = x - y
//
// Zero-coupon bond:  P(t,T) = A_x e^{-B_x x(t)} A_y e^{+B_y y(t)}, with, for
// tau = T - t and each leg z,
//
//   A_z = ( phi1 e^{phi2 tau} / (phi2 (e^{phi1 tau} - 1) + phi1) )^{phi3}
//   B_z = (e^{phi1 tau} - 1) / (phi2 (e^{phi1 tau} - 1) + phi1)
//
//   x-leg: phi1 = sqrt(k^2 + 2 sigma^2),  y-leg: phi1 = sqrt(k^2 - 2 sigma^2)
//   phi2 = (k + phi1) / 2,  phi3 = 2 k theta / sigma^2
//
// The y-leg enters with the opposite sign, which flips the sign of the
// quadratic term in its Riccati equation and hence the sign under the root.
//

#include <functional>
#include <span>
#include <vector>

namespace cirdiff {

enum class Leg { x, y };

const char* to_string(Leg leg) noexcept;

/// Smallest volatility accepted by the phi map.
inline constexpr double kMinSigma = 1e-8;
/// Lower bound on phi1, phi2 and on the strict-interior margins.
inline constexpr double kPhiEps = 1e-8;

struct CirParams {
    double k = 0.0;      // mean-reversion speed, 1/year
    double sigma = 0.0;  // volatility
    double theta = 0.0;  // long-run mean
    double z0 = 0.0;     // initial level

    friend bool operator==(const CirParams&, const CirParams&) = default;
};

struct PhiTriple {
    double phi1 = 0.0;
    double phi2 = 0.0;
    double phi3 = 0.0;
    Leg leg = Leg::x;
};

/// r = x - y with x, y independent CIR processes.
struct DiffModel {
    CirParams x;
    CirParams y;

    friend bool operator==(const DiffModel&, const DiffModel&) = default;
};

struct BondFactors {
    double a = 1.0;
    double b = 0.0;
};

/// Derivatives of log A and B with respect to maturity T (equivalently tau).
struct BondFactorDerivs {
    double dlog_a = 0.0;
    double db = 0.0;
};

struct FellerCheck {
    double margin = 0.0;  // 2 k theta - sigma^2
    bool pass = false;
};

/// Residuals of the (B, log A) Riccati pair for one leg at one maturity.
struct RiccatiResidual {
    double tau = 0.0;
    double b_eq = 0.0;
    double log_a_eq = 0.0;
};

// -- parameter maps ---------------------------------------------------------

PhiTriple phi_from_model(const CirParams& p, Leg leg);

/// Inverse map; the returned params carry z0 = 0.
CirParams model_from_phi(const PhiTriple& t);

/// Throws invalid_phi unless every PhiTriple invariant holds.
void validate(const PhiTriple& t);

/// Throws unless both legs are usable for pricing (sigma may be exactly 0,
/// which selects the deterministic limit; otherwise the phi map must succeed).
void validate(const DiffModel& m);

FellerCheck feller_check(const CirParams& p);

// -- bond factors -----------------------------------------------------------

BondFactors bond_factors(const PhiTriple& t, double tau);
BondFactorDerivs bond_factor_derivs(const PhiTriple& t, double tau);

/// Leg factors straight from model parameters. A leg with sigma == 0 uses the
/// noiseless limit B = (1 - e^{-k tau}) / k, log A = -/+ theta (tau - B).
BondFactors bond_factors(const CirParams& p, Leg leg, double tau);
BondFactorDerivs bond_factor_derivs(const CirParams& p, Leg leg, double tau);

namespace detail {
// No invariant checks; requires phi1 > 0, phi2 > 0 and tau >= 0. Used by the
// optimizer, which probes points outside the admissible set.
BondFactors bond_factors_unchecked(double phi1, double phi2, double phi3, double tau) noexcept;
}  // namespace detail

// -- prices, rates, moments -------------------------------------------------

double zcb_price(const DiffModel& m, double x_t, double y_t, double tau);

/// Price at the model's own initial state (x0, y0).
double zcb_price(const DiffModel& m, double tau);

double spot_rate(double price, double tau);

double inst_forward_rate(const DiffModel& m, double x_t, double y_t, double tau);

double cir_cond_mean(const CirParams& p, double z_s, double dt);
double cir_cond_var(const CirParams& p, double z_s, double dt);

double cond_mean(const DiffModel& m, double x_s, double y_s, double dt);
double cond_var(const DiffModel& m, double x_s, double y_s, double dt);

// -- Riccati residuals ------------------------------------------------------

/// Residuals with analytic maturity derivatives of the closed form.
std::vector<RiccatiResidual> riccati_residual(const PhiTriple& t,
                                              std::span<const double> tau_grid);

using FactorFunction = std::function<BondFactors(double tau)>;

/// Residuals of arbitrary candidate factors against the Riccati system with
/// constant CIR coefficients (k, sigma, theta). Derivatives by central
/// differences of step fd_step; one-sided second order for tau < fd_step.
std::vector<RiccatiResidual> riccati_residual(const CirParams& coefficients,
                                              Leg leg,
                                              const FactorFunction& factors,
                                              std::span<const double> tau_grid,
                                              double fd_step = 1e-6);

}  // namespace cirdiff
