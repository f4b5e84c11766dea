#include "oracles/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace oracle {

Factors textbook_cir(double k, double sigma, double theta, double tau) {
    const double h = std::sqrt(k * k + 2.0 * sigma * sigma);
    const double g = std::exp(h * tau) - 1.0;
    const double den = 2.0 * h + (k + h) * g;
    Factors f;
    f.a = std::pow(2.0 * h * std::exp((k + h) * tau / 2.0) / den, 2.0 * k * theta / (sigma * sigma));
    f.b = 2.0 * g / den;
    return f;
}

Factors riccati_rk4(double k, double sigma, double theta, cirdiff::Leg leg, double tau, double h) {
    const double s = leg == cirdiff::Leg::x ? -0.5 * sigma * sigma : 0.5 * sigma * sigma;
    const double sa = leg == cirdiff::Leg::x ? -k * theta : k * theta;
    auto fb = [&](double b) { return 1.0 - k * b + s * b * b; };
    const long n = std::lround(std::ceil(tau / h));
    const double dt = tau / static_cast<double>(n);
    double b = 0.0, la = 0.0;
    for (long i = 0; i < n; ++i) {
        const double k1 = fb(b);
        const double k2 = fb(b + 0.5 * dt * k1);
        const double k3 = fb(b + 0.5 * dt * k2);
        const double k4 = fb(b + dt * k3);
        // log A is a quadrature of B along the same stages.
        la += dt / 6.0 * sa * (b + 2.0 * (b + 0.5 * dt * k1) + 2.0 * (b + 0.5 * dt * k2) + (b + dt * k3));
        b += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return {std::exp(la), b};
}

cirdiff::QuoteSet flat_quotes(double c, const std::vector<double>& deposit_tenors,
                              const std::vector<double>& swap_tenors) {
    cirdiff::QuoteSet q;
    for (double T : deposit_tenors) {
        q.deposits.push_back({cirdiff::InstrumentType::deposit, T, std::expm1(c * T) / T, 0});
    }
    for (double T : swap_tenors) {
        const int n = static_cast<int>(std::lround(T));
        if (std::abs(n - T) > 1e-12) throw std::invalid_argument("flat_quotes: whole-year swaps only");
        q.swaps.push_back({cirdiff::InstrumentType::swap, T, flat_par_rate(c, 0.0, n), 0});
    }
    return q;
}

double flat_annuity(double c, double start, int tenor_years) {
    double a = 0.0;
    for (int i = 1; i <= tenor_years; ++i) a += std::exp(-c * (start + i));
    return a;
}

double flat_par_rate(double c, double start, int tenor_years) {
    return (std::exp(-c * start) - std::exp(-c * (start + tenor_years))) / flat_annuity(c, start, tenor_years);
}

std::vector<double> euler_ode_path(double k, double theta, double z0, double delta, std::size_t steps) {
    std::vector<double> z(steps + 1);
    z[0] = z0;
    for (std::size_t i = 0; i < steps; ++i) z[i + 1] = z[i] + k * (theta - z[i]) * delta;
    return z;
}

double ode_solution(double k, double theta, double z0, double t) {
    return z0 * std::exp(-k * t) + theta * (1.0 - std::exp(-k * t));
}

double bachelier_payer_quadrature(double forward, double strike, double vol, double expiry, double annuity) {
    const double s = vol * std::sqrt(expiry);
    // Integrate (F + s z - K)^+ phi(z) over z in [z0, 12] with composite Simpson.
    const double z0 = std::max((strike - forward) / s, -12.0);
    const double z1 = 12.0;
    if (z0 >= z1) return 0.0;
    const int n = 200000;
    const double h = (z1 - z0) / n;
    const double inv_sqrt_2pi = 0.3989422804014327;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double z = z0 + h * i;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * std::max(forward + s * z - strike, 0.0) * inv_sqrt_2pi * std::exp(-0.5 * z * z);
    }
    return annuity * acc * h / 3.0;
}

cirdiff::ZeroCurve model_curve(const cirdiff::DiffModel& m, const std::vector<double>& maturities) {
    std::vector<double> rates;
    for (double T : maturities) rates.push_back(-std::log(cirdiff::zcb_price(m, T)) / T);
    return cirdiff::ZeroCurve::from_zero_rates(maturities, rates);
}

std::vector<double> standard_pillars() {
    return {0.25, 0.5, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 15, 20, 25, 30};
}

}  // namespace oracle
