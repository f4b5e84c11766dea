#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cirdiff/error.hpp"
#include "cirdiff/pricing.hpp"
#include "oracles/oracles.hpp"

using namespace cirdiff;

namespace {

const DiffModel kModel2019 = oracle::kRef2019.model();

PathSet paths_for(const DiffModel& m, double horizon, std::size_t n, std::uint64_t seed = 21) {
    SimConfig c;
    c.horizon = horizon;
    c.paths = n;
    c.seed = seed;
    c.record_stride = 64;
    return simulate(m, c);
}

SwaptionSpec payer(double maturity, double tenor, double strike) {
    SwaptionSpec s;
    s.maturity = maturity;
    s.tenor = tenor;
    s.strike = strike;
    return s;
}

// Exact integral of the noiseless mean-reverting ODE from level z over tau.
double ode_integral(double k, double theta, double z, double tau) {
    return theta * tau + (z - theta) * (1.0 - std::exp(-k * tau)) / k;
}

}  // namespace

TEST_CASE("Bachelier identities") {
    const double A = 4.3, T = 5.0, vol = 0.0055;
    SwaptionSpec p = payer(T, 5.0, 0.001);
    SwaptionSpec r = p;
    r.kind = SwaptionKind::receiver;

    SUBCASE("at the money") {
        const double expected = A * vol * std::sqrt(T / (2.0 * std::numbers::pi));
        CHECK(std::abs(bachelier_price(p, 0.001, A, vol) - expected) <= 1e-12 * expected);
        CHECK(std::abs(bachelier_price(r, 0.001, A, vol) - expected) <= 1e-12 * expected);
    }
    SUBCASE("parity") {
        for (double F : {-0.02, -0.003, 0.0, 0.0009, 0.0011, 0.004, 0.03}) {
            for (double v : {1e-6, 0.002, 0.0055, 0.02}) {
                const double diff = bachelier_price(p, F, A, v) - bachelier_price(r, F, A, v);
                REQUIRE(std::abs(diff - A * (F - p.strike)) <= 1e-15);
            }
        }
    }
    SUBCASE("zero volatility is intrinsic") {
        CHECK(bachelier_price(p, 0.004, A, 0.0) == A * (0.004 - 0.001));
        CHECK(bachelier_price(p, -0.004, A, 0.0) == 0.0);
        CHECK(bachelier_price(r, -0.004, A, 0.0) == A * (0.001 + 0.004));
        CHECK(bachelier_price(p, 0.001, A, 0.0) == 0.0);
        CHECK(bachelier_price(p, 0.004, A, 1e-12) == doctest::Approx(A * 0.003).epsilon(1e-12));
    }
    SUBCASE("matches quadrature of the payoff") {
        for (double K : {-0.01, -0.002, 0.001, 0.003, 0.012}) {
            SwaptionSpec s = payer(T, 5.0, K);
            const double closed = bachelier_price(s, 0.001, A, vol);
            const double quad = oracle::bachelier_payer_quadrature(0.001, K, vol, T, A);
            CHECK(closed == doctest::Approx(quad).epsilon(1e-9));
        }
    }
    CHECK_THROWS_AS(bachelier_price(p, 0.0, A, -0.1), Error);
    CHECK_THROWS_AS(bachelier_price(payer(0.0, 1.0, 0.0), 0.0, A, 0.01), Error);
    CHECK_THROWS_AS(bachelier_price(payer(1.0, 1.0, std::nan("")), 0.0, A, 0.01), Error);
}

TEST_CASE("forward par rate and annuity") {
    const std::vector<double> pillars{1, 2, 5, 10, 20, 30};
    {
        const ZeroCurve zero = ZeroCurve::from_zero_rates(pillars, std::vector<double>(6, 0.0));
        const SwapRate s = par_swap_rate_and_annuity(zero, 2.0, 5.0);
        CHECK(s.rate == 0.0);
        CHECK(s.annuity == 5.0);
    }
    for (double c : {0.01, -0.005, 0.03}) {
        const ZeroCurve flat = ZeroCurve::from_zero_rates(pillars, std::vector<double>(6, c));
        for (int start : {1, 5, 10}) {
            for (int tenor : {1, 2, 5, 10}) {
                const SwapRate s = par_swap_rate_and_annuity(flat, start, tenor);
                CHECK(s.rate == doctest::Approx(oracle::flat_par_rate(c, start, tenor)).epsilon(1e-12));
                CHECK(s.annuity == doctest::Approx(oracle::flat_annuity(c, start, tenor)).epsilon(1e-12));
                if (c < 0) CHECK(s.annuity > tenor);
            }
        }
    }
    const ZeroCurve short_curve = ZeroCurve::from_zero_rates({1, 5}, {0.01, 0.01});
    CHECK_THROWS_AS(par_swap_rate_and_annuity(short_curve, 2.0, 5.0), Error);
}

TEST_CASE("forward zero-coupon prices") {
    const PathSet p = paths_for(kModel2019, 5.0, 500);
    for (double T : {0.5, 1.0, 5.0, 10.0, 30.0}) {
        const McEstimate e = model_forward_zcb(p, 0.0, T);
        CHECK(std::abs(e.mean - zcb_price(kModel2019, T)) <= 1e-14);
        CHECK(e.std_err == 0.0);
    }
    CHECK_THROWS_AS(model_forward_zcb(p, 1.0, 1.0), Error);
    CHECK_THROWS_AS(model_forward_zcb(p, 1.01, 3.0), Error);

    SUBCASE("deterministic model uses the Euler state") {
        const DiffModel m{{0.6, 0.0, 0.12, 0.05}, {0.5, 0.0, 0.08, 0.09}};
        const PathSet d = paths_for(m, 2.0, 2);
        const auto xs = oracle::euler_ode_path(0.6, 0.12, 0.05, 1.0 / 256, 256);
        const auto ys = oracle::euler_ode_path(0.5, 0.08, 0.09, 1.0 / 256, 256);
        for (double tau : {0.5, 3.0, 10.0}) {
            const double on_euler = std::exp(-ode_integral(0.6, 0.12, xs[256], tau) + ode_integral(0.5, 0.08, ys[256], tau));
            const double on_exact = std::exp(-ode_integral(0.6, 0.12, oracle::ode_solution(0.6, 0.12, 0.05, 1.0), tau) +
                                             ode_integral(0.5, 0.08, oracle::ode_solution(0.5, 0.08, 0.09, 1.0), tau));
            const double model = model_forward_zcb(d, 1.0, 1.0 + tau).mean;
            CHECK(model == doctest::Approx(on_euler).epsilon(1e-12));
            CHECK(std::abs(model - on_exact) < tau * 0.5 / 256);
        }
    }
}

TEST_CASE("model swaption prices") {
    const PathSet p = paths_for(kModel2019, 5.0, 4000);
    const ZeroCurve curve = oracle::model_curve(kModel2019, oracle::standard_pillars());

    SUBCASE("deep out of the money") {
        const SwapRate s0 = par_swap_rate_and_annuity(curve, 1.0, 1.0);
        CHECK(model_swaption_price(p, payer(1.0, 1.0, s0.rate + 1.0)).mean < 1e-8);
    }
    SUBCASE("very low strike recovers forward swap value") {
        const double K = -1.0;
        for (auto [t, n] : {std::pair{1.0, 2}, std::pair{5.0, 5}}) {
            double annuity = 0.0;
            for (int i = 1; i <= n; ++i) annuity += zcb_price(kModel2019, t + i);
            const double swap_value = zcb_price(kModel2019, t) - zcb_price(kModel2019, t + n) - K * annuity;
            const McEstimate e = model_swaption_price(p, payer(t, n, K), 0.999);
            CHECK(e.contains(swap_value));
        }
    }
    SUBCASE("single period, very low strike is a forward bond") {
        // D(t) * P(t,t+1) * (1/P(t,t+1) - 1 - K) = D(t) (1 - P) - K D P
        const double K = -1.0;
        const McEstimate e = model_swaption_price(p, payer(2.0, 1.0, K), 0.999);
        const double expected = zcb_price(kModel2019, 2.0) - (1.0 + K) * zcb_price(kModel2019, 3.0);
        CHECK(e.contains(expected));
    }
    SUBCASE("parity on shared paths and Jensen sandwich") {
        const SwaptionSpec pay = payer(1.0, 1.0, 0.0);
        const SwaptionPathValues v = swaption_path_values(p, pay);
        double mean_s = 0.0;
        for (double s : v.swap_rate) mean_s += s;
        mean_s /= static_cast<double>(v.swap_rate.size());

        SwaptionSpec atm = payer(1.0, 1.0, mean_s);
        SwaptionSpec rec = atm;
        rec.kind = SwaptionKind::receiver;
        const auto pp = swaption_payoffs(v, atm);
        const auto rp = swaption_payoffs(v, rec);
        double abs_mean = 0.0, lin = 0.0, pm = 0.0, rm = 0.0;
        for (std::size_t k = 0; k < pp.size(); ++k) {
            const double linear = v.discount[k] * v.annuity[k] * (v.swap_rate[k] - mean_s);
            REQUIRE(pp[k] - rp[k] == doctest::Approx(linear).epsilon(1e-12).scale(1e-12));
            abs_mean += std::abs(linear);
            lin += linear;
            pm += pp[k];
            rm += rp[k];
        }
        const double n = static_cast<double>(pp.size());
        CHECK(pm / n > 0.0);
        CHECK(pm / n < abs_mean / n);
        CHECK(std::abs((pm - rm) / n - lin / n) < 1e-15);
    }
    SUBCASE("monotone in strike") {
        double prev = std::numeric_limits<double>::infinity();
        double prev_se = 0.0;
        for (double K = -0.01; K <= 0.02; K += 0.0025) {
            const McEstimate e = model_swaption_price(p, payer(5.0, 5.0, K));
            CHECK(e.mean >= 0.0);
            CHECK(e.mean <= prev + 3.0 * std::max(e.std_err, prev_se));
            prev = e.mean;
            prev_se = e.std_err;
        }
    }
    SUBCASE("deterministic") {
        const auto a = model_swaption_price(p, payer(2.0, 5.0, 0.001));
        const auto b = model_swaption_price(p, payer(2.0, 5.0, 0.001));
        CHECK(a.mean == b.mean);
        CHECK(a.std_err == b.std_err);
    }
    CHECK_THROWS_AS(model_swaption_price(p, payer(1.01, 1.0, 0.0)), Error);
}

TEST_CASE("swaption quote parsing") {
    std::istringstream ok("maturity_years,tenor_years,strike,normal_vol\n1,1,0.001,0.004\n2,5,-0.002,0.005\n");
    const auto q = parse_swaption_quotes(ok);
    REQUIRE(q.size() == 2);
    CHECK(q[1].strike == -0.002);
    std::istringstream bad_header("maturity,tenor,strike,vol\n1,1,0,0\n");
    CHECK_THROWS_AS(parse_swaption_quotes(bad_header), Error);
    std::istringstream bad_row("maturity_years,tenor_years,strike,normal_vol\n1,1,0.001\n");
    CHECK_THROWS_AS(parse_swaption_quotes(bad_row), Error);
    std::istringstream neg("maturity_years,tenor_years,strike,normal_vol\n1,1,0.001,-0.1\n");
    CHECK_THROWS_AS(parse_swaption_quotes(neg), Error);
    CHECK_THROWS_AS(load_swaption_quotes("/nonexistent/swaptions.csv"), Error);
}

TEST_CASE("swaption grid report") {
    SUBCASE("single deterministic cell against closed-form intrinsic mismatch") {
        const DiffModel m{{0.6, 0.0, 0.12, 0.05}, {0.5, 0.0, 0.08, 0.09}};
        const PathSet p = paths_for(m, 2.0, 3);
        const ZeroCurve curve = ZeroCurve::from_zero_rates({1, 2, 5, 10}, {-0.002, -0.001, 0.0, 0.002});
        const std::vector<SwaptionQuote> quotes{{2.0, 2.0, -0.05, 0.0, 2}};
        const SwaptionGrid g = swaption_grid_report(p, curve, quotes);
        REQUIRE(g.cells.size() == 1);
        REQUIRE(g.at(0, 0).has_value());
        CHECK(g.warnings.empty());

        // Market: intrinsic on the curve forward.
        const double a_mkt = curve.discount(3.0) + curve.discount(4.0);
        const double f_mkt = (curve.discount(2.0) - curve.discount(4.0)) / a_mkt;
        const double market = a_mkt * (f_mkt + 0.05);
        // Model: Euler state at t = 2, exact ODE bond prices, left-point discount.
        const auto xs = oracle::euler_ode_path(0.6, 0.12, 0.05, 1.0 / 256, 512);
        const auto ys = oracle::euler_ode_path(0.5, 0.08, 0.09, 1.0 / 256, 512);
        double integral = 0.0;
        for (std::size_t i = 0; i < 512; ++i) integral += (xs[i] - ys[i]) / 256.0;
        auto bond = [&](double tau) {
            return std::exp(-ode_integral(0.6, 0.12, xs[512], tau) + ode_integral(0.5, 0.08, ys[512], tau));
        };
        const double a_mod = bond(1.0) + bond(2.0);
        const double s_mod = (1.0 - bond(2.0)) / a_mod;
        const double model = std::exp(-integral) * a_mod * (s_mod + 0.05);

        const SwaptionCell& c = *g.at(0, 0);
        CHECK(c.market_price == doctest::Approx(market).epsilon(1e-12));
        CHECK(c.model.mean == doctest::Approx(model).epsilon(1e-11));
        CHECK(c.difference == doctest::Approx(model - market).epsilon(1e-9));
    }
    SUBCASE("missing and duplicate cells become warnings") {
        const PathSet p = paths_for(kModel2019, 2.0, 200);
        const ZeroCurve curve = oracle::model_curve(kModel2019, oracle::standard_pillars());
        const std::vector<SwaptionQuote> quotes{{1, 1, 0.0, 0.004, 2}, {1, 2, 0.0, 0.004, 3},
                                                {2, 1, 0.0, 0.004, 4}, {1, 1, 0.001, 0.004, 5}};
        const SwaptionGrid g = swaption_grid_report(p, curve, quotes);
        CHECK(g.maturities == std::vector<double>{1, 2});
        CHECK(g.tenors == std::vector<double>{1, 2});
        CHECK(g.at(0, 0)->quote.strike == 0.0);
        CHECK_FALSE(g.at(1, 1).has_value());
        CHECK(g.warnings.size() == 2);

        const SwaptionGrid again = swaption_grid_report(p, curve, quotes);
        for (std::size_t i = 0; i < g.cells.size(); ++i) {
            if (g.cells[i]) CHECK(g.cells[i]->difference == again.cells[i]->difference);
        }

        const auto path = std::filesystem::temp_directory_path() / "cirdiff_swaption_report.csv";
        write_swaption_report(path, g);
        std::ifstream in(path);
        std::string line;
        std::getline(in, line);
        CHECK(line == "maturity_years,tenor_years,strike,normal_vol,model_price,market_price,difference_bp,ci_low,ci_high");
        std::size_t rows = 0;
        while (std::getline(in, line)) ++rows;
        CHECK(rows == 3);
        std::filesystem::remove(path);
    }
    SUBCASE("unpriceable cell is reported, not thrown") {
        const PathSet p = paths_for(kModel2019, 2.0, 50);
        const ZeroCurve curve = ZeroCurve::from_zero_rates({1, 2, 5}, {0.0, 0.0, 0.0});
        const std::vector<SwaptionQuote> quotes{{1, 1, 0.0, 0.004, 2}, {2, 10, 0.0, 0.004, 3}};
        const SwaptionGrid g = swaption_grid_report(p, curve, quotes);
        CHECK(g.at(0, 0).has_value());
        CHECK_FALSE(g.at(1, 1).has_value());
        bool found = false;
        for (const auto& w : g.warnings) found = found || w.find("not priced") != std::string::npos;
        CHECK(found);
    }
}
