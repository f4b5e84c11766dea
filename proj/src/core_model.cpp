#include "cirdiff/core_model.hpp"

#include <cmath>
#include <sstream>

#include "cirdiff/error.hpp"

namespace cirdiff {

const char* to_string(Leg leg) noexcept { return leg == Leg::x ? "x" : "y"; }

namespace {

// Feller boundary phi3 = 1 is admissible; allow for rounding in the maps.
constexpr double kFellerSlack = 1e-12;

void require_tau(double tau) {
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
        std::ostringstream os;
        os << "maturity tau must be finite and >= 0, got " << tau;
        fail(ErrorCode::domain, os.str());
    }
}

// Leg sign s in P = ... exp(s * B * z) and in d/dtau log A = s k theta B.
double leg_sign(Leg leg) { return leg == Leg::x ? -1.0 : 1.0; }

bool deterministic(const CirParams& p) { return p.sigma == 0.0; }

// (1 - e^{-k dt}) / k, with the k -> 0 limit dt.
double decay_integral(double k, double dt) {
    return k == 0.0 ? dt : -std::expm1(-k * dt) / k;
}

}  // namespace

// -- parameter maps ---------------------------------------------------------

PhiTriple phi_from_model(const CirParams& p, Leg leg) {
    if (!std::isfinite(p.k) || !std::isfinite(p.sigma) || !std::isfinite(p.theta) || p.k < 0.0 ||
        p.sigma < 0.0 || p.theta < 0.0) {
        fail(ErrorCode::domain, "CIR parameters must be finite and non-negative");
    }
    if (p.sigma < kMinSigma) {
        fail(ErrorCode::domain, "sigma below 1e-8: phi3 = 2 k theta / sigma^2 is undefined");
    }
    const double s2 = p.sigma * p.sigma;
    double disc = p.k * p.k + 2.0 * s2;
    if (leg == Leg::y) {
        disc = p.k * p.k - 2.0 * s2;
        if (disc < 0.0) {
            std::ostringstream os;
            os << "y-leg requires k^2 >= 2 sigma^2, got k^2 - 2 sigma^2 = " << disc;
            fail(ErrorCode::discriminant_negative, os.str());
        }
    }
    PhiTriple t;
    t.leg = leg;
    t.phi1 = std::sqrt(disc);
    t.phi2 = 0.5 * (p.k + t.phi1);
    t.phi3 = 2.0 * p.k * p.theta / s2;
    return t;
}

void validate(const PhiTriple& t) {
    auto bad = [&](const char* why) {
        std::ostringstream os;
        os << "invalid " << to_string(t.leg) << "-leg phi (" << t.phi1 << ", " << t.phi2 << ", "
           << t.phi3 << "): " << why;
        fail(ErrorCode::invalid_phi, os.str());
    };
    if (!std::isfinite(t.phi1) || !std::isfinite(t.phi2) || !std::isfinite(t.phi3)) bad("not finite");
    if (t.phi1 < kPhiEps || t.phi2 < kPhiEps) bad("phi1 and phi2 must be >= 1e-8");
    if (t.phi3 < 1.0 - kFellerSlack) bad("phi3 < 1 (Feller condition)");
    if (2.0 * t.phi2 < t.phi1) bad("phi1 > 2 phi2 (negative mean reversion)");
    if (t.leg == Leg::x && t.phi2 > t.phi1) bad("phi2 > phi1 (imaginary sigma)");
    if (t.leg == Leg::y && t.phi1 > t.phi2) bad("phi1 > phi2 (imaginary sigma)");
}

CirParams model_from_phi(const PhiTriple& t) {
    validate(t);
    const double k = 2.0 * t.phi2 - t.phi1;
    // sigma^2 = 2 phi2 (phi1 - phi2) on x, 2 phi2 (phi2 - phi1) on y
    const double gap = t.leg == Leg::x ? t.phi1 - t.phi2 : t.phi2 - t.phi1;
    const double s2 = 2.0 * t.phi2 * gap;
    if (!(k > 0.0)) {
        fail(ErrorCode::invalid_phi, "phi1 = 2 phi2: zero mean reversion leaves theta undefined");
    }
    if (!(s2 > 0.0) || std::sqrt(s2) < kMinSigma) {
        fail(ErrorCode::invalid_phi, "phi1 = phi2: zero volatility leaves phi3 undefined");
    }
    CirParams p;
    p.k = k;
    p.sigma = std::sqrt(s2);
    p.theta = t.phi3 * s2 / (2.0 * k);
    return p;
}

void validate(const DiffModel& m) {
    for (Leg leg : {Leg::x, Leg::y}) {
        const CirParams& p = leg == Leg::x ? m.x : m.y;
        if (!std::isfinite(p.z0)) fail(ErrorCode::domain, "initial state must be finite");
        if (deterministic(p)) {
            if (!std::isfinite(p.k) || !std::isfinite(p.theta) || p.k < 0.0 || p.theta < 0.0) {
                fail(ErrorCode::domain, "CIR parameters must be finite and non-negative");
            }
        } else {
            (void)phi_from_model(p, leg);
        }
    }
}

FellerCheck feller_check(const CirParams& p) {
    FellerCheck out;
    out.margin = 2.0 * p.k * p.theta - p.sigma * p.sigma;
    out.pass = out.margin >= 0.0;
    return out;
}

// -- bond factors -----------------------------------------------------------
//
// Evaluated in the e^{-phi1 tau} form so that large tau does not overflow:
//   B     = (1 - E) / (phi2 (1 - E) + phi1 E),                 E = e^{-phi1 tau}
//   log A = phi3 (log phi1 + (phi2 - phi1) tau - log(phi2 (1 - E) + phi1 E))

namespace detail {

BondFactors bond_factors_unchecked(double phi1, double phi2, double phi3, double tau) noexcept {
    const double e = std::exp(-phi1 * tau);
    const double one_minus = -std::expm1(-phi1 * tau);
    const double den = phi2 * one_minus + phi1 * e;
    BondFactors f;
    f.b = one_minus / den;
    f.a = std::exp(phi3 * (std::log(phi1) - std::log(den) + (phi2 - phi1) * tau));
    return f;
}

}  // namespace detail

BondFactors bond_factors(const PhiTriple& t, double tau) {
    validate(t);
    require_tau(tau);
    return detail::bond_factors_unchecked(t.phi1, t.phi2, t.phi3, tau);
}

BondFactorDerivs bond_factor_derivs(const PhiTriple& t, double tau) {
    validate(t);
    require_tau(tau);
    const double e = std::exp(-t.phi1 * tau);
    const double one_minus = -std::expm1(-t.phi1 * tau);
    const double den = t.phi2 * one_minus + t.phi1 * e;
    const double b = one_minus / den;
    BondFactorDerivs d;
    d.db = t.phi1 * t.phi1 * e / (den * den);
    d.dlog_a = -t.phi2 * t.phi3 * (t.phi1 - t.phi2) * b;
    return d;
}

BondFactors bond_factors(const CirParams& p, Leg leg, double tau) {
    require_tau(tau);
    if (!deterministic(p)) return bond_factors(phi_from_model(p, leg), tau);
    BondFactors f;
    f.b = decay_integral(p.k, tau);
    f.a = std::exp(leg_sign(leg) * p.theta * (tau - f.b));
    return f;
}

BondFactorDerivs bond_factor_derivs(const CirParams& p, Leg leg, double tau) {
    require_tau(tau);
    if (!deterministic(p)) return bond_factor_derivs(phi_from_model(p, leg), tau);
    BondFactorDerivs d;
    d.db = std::exp(-p.k * tau);
    d.dlog_a = leg_sign(leg) * p.k * p.theta * decay_integral(p.k, tau);
    return d;
}

// -- prices, rates, moments -------------------------------------------------

double zcb_price(const DiffModel& m, double x_t, double y_t, double tau) {
    if (!(x_t >= 0.0) || !(y_t >= 0.0)) fail(ErrorCode::domain, "bond price needs nonnegative states");
    const BondFactors fx = bond_factors(m.x, Leg::x, tau);
    const BondFactors fy = bond_factors(m.y, Leg::y, tau);
    return fx.a * fy.a * std::exp(-fx.b * x_t + fy.b * y_t);
}

double zcb_price(const DiffModel& m, double tau) { return zcb_price(m, m.x.z0, m.y.z0, tau); }

double spot_rate(double price, double tau) {
    if (!(tau > 0.0)) fail(ErrorCode::domain, "spot rate needs tau > 0");
    if (!(price > 0.0)) fail(ErrorCode::domain, "spot rate needs a positive price");
    return -std::log(price) / tau;
}

double inst_forward_rate(const DiffModel& m, double x_t, double y_t, double tau) {
    const BondFactorDerivs dx = bond_factor_derivs(m.x, Leg::x, tau);
    const BondFactorDerivs dy = bond_factor_derivs(m.y, Leg::y, tau);
    return -dx.dlog_a + dx.db * x_t - dy.dlog_a - dy.db * y_t;
}

double cir_cond_mean(const CirParams& p, double z_s, double dt) {
    if (!(dt >= 0.0)) fail(ErrorCode::domain, "conditional moments need dt >= 0");
    const double e = std::exp(-p.k * dt);
    return z_s * e + p.theta * (1.0 - e);
}

double cir_cond_var(const CirParams& p, double z_s, double dt) {
    if (!(dt >= 0.0)) fail(ErrorCode::domain, "conditional moments need dt >= 0");
    // z s^2/k (e^{-k dt} - e^{-2k dt}) + theta s^2/(2k) (1 - e^{-k dt})^2
    const double e = std::exp(-p.k * dt);
    const double g = decay_integral(p.k, dt);  // (1 - e)/k
    const double s2 = p.sigma * p.sigma;
    return z_s * s2 * e * g + 0.5 * p.theta * s2 * g * (1.0 - e);
}

double cond_mean(const DiffModel& m, double x_s, double y_s, double dt) {
    return cir_cond_mean(m.x, x_s, dt) - cir_cond_mean(m.y, y_s, dt);
}

double cond_var(const DiffModel& m, double x_s, double y_s, double dt) {
    return cir_cond_var(m.x, x_s, dt) + cir_cond_var(m.y, y_s, dt);
}

// -- Riccati residuals ------------------------------------------------------
//
// With lambda = -k, eta = k theta, gamma = sigma^2, delta = 0 and tau = T - t:
//   x:  dB/dtau = 1 - k B - sigma^2 B^2 / 2,   dlogA/dtau = -k theta B
//   y:  dB/dtau = 1 - k B + sigma^2 B^2 / 2,   dlogA/dtau = +k theta B

namespace {

RiccatiResidual residual_at(const CirParams& c, Leg leg, double tau, double b, double db,
                            double dlog_a) {
    const double s = leg_sign(leg);
    RiccatiResidual r;
    r.tau = tau;
    r.b_eq = db - (1.0 - c.k * b + s * 0.5 * c.sigma * c.sigma * b * b);
    r.log_a_eq = dlog_a - s * c.k * c.theta * b;
    return r;
}

}  // namespace

std::vector<RiccatiResidual> riccati_residual(const PhiTriple& t, std::span<const double> tau_grid) {
    const CirParams c = model_from_phi(t);
    std::vector<RiccatiResidual> out;
    out.reserve(tau_grid.size());
    for (double tau : tau_grid) {
        const BondFactors f = bond_factors(t, tau);
        const BondFactorDerivs d = bond_factor_derivs(t, tau);
        out.push_back(residual_at(c, t.leg, tau, f.b, d.db, d.dlog_a));
    }
    return out;
}

std::vector<RiccatiResidual> riccati_residual(const CirParams& coefficients, Leg leg,
                                              const FactorFunction& factors,
                                              std::span<const double> tau_grid, double fd_step) {
    if (!(fd_step > 0.0)) fail(ErrorCode::domain, "finite-difference step must be positive");
    const double h = fd_step;
    std::vector<RiccatiResidual> out;
    out.reserve(tau_grid.size());
    for (double tau : tau_grid) {
        require_tau(tau);
        const BondFactors f0 = factors(tau);
        double db = 0.0;
        double dlog_a = 0.0;
        if (tau >= h) {
            const BondFactors fp = factors(tau + h);
            const BondFactors fm = factors(tau - h);
            db = (fp.b - fm.b) / (2.0 * h);
            dlog_a = (std::log(fp.a) - std::log(fm.a)) / (2.0 * h);
        } else {
            const BondFactors f1 = factors(tau + h);
            const BondFactors f2 = factors(tau + 2.0 * h);
            db = (-3.0 * f0.b + 4.0 * f1.b - f2.b) / (2.0 * h);
            dlog_a = (-3.0 * std::log(f0.a) + 4.0 * std::log(f1.a) - std::log(f2.a)) / (2.0 * h);
        }
        out.push_back(residual_at(coefficients, leg, tau, f0.b, db, dlog_a));
    }
    return out;
}

}  // namespace cirdiff
