#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cirdiff/error.hpp"
#include "cirdiff/marketdata.hpp"
#include "cirdiff/spline.hpp"
#include "oracles/oracles.hpp"

using namespace cirdiff;

namespace {

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an exception");
    return ErrorCode::domain;
}

const std::vector<double> kDepos{1.0 / 12, 0.25, 0.5, 1.0};
const std::vector<double> kSwaps{2, 3, 4, 5, 7, 10, 12, 15, 20, 25, 30};

}  // namespace

TEST_CASE("dates") {
    const Date d = parse_iso_date("2019-12-30");
    CHECK(format_iso_date(d) == "2019-12-30");
    CHECK(year_fraction(d, parse_iso_date("2020-12-30")) == doctest::Approx(366.0 / 365.0));
    CHECK(code_of([] { parse_iso_date("30/12/2019"); }) == ErrorCode::parse);
    CHECK(code_of([] { parse_iso_date("2019-02-30"); }) == ErrorCode::parse);
}

TEST_CASE("quote parsing") {
    std::istringstream ok("type,tenor_years,rate\nDEPO,0.5,-0.003\nSWAP,10,0.002\n");
    const QuoteSet q = parse_quotes(ok);
    REQUIRE(q.deposits.size() == 1);
    REQUIRE(q.swaps.size() == 1);
    CHECK(q.deposits[0].rate == -0.003);
    CHECK(q.swaps[0].tenor == 10.0);

    std::istringstream empty("");
    try {
        parse_quotes(empty);
        FAIL("no exception");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::validation);
        CHECK(std::string(e.what()).find("no instruments") != std::string::npos);
    }

    std::istringstream unsorted("type,tenor_years,rate\nSWAP,5,0.001\nSWAP,3,0.001\n");
    try {
        parse_quotes(unsorted, "q.csv");
        FAIL("no exception");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::validation);
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }

    std::istringstream bad("type,tenor_years,rate\nDEPO,abc,0.1\n");
    CHECK(code_of([&] { parse_quotes(bad); }) == ErrorCode::parse);
    std::istringstream bad_type("type,tenor_years,rate\nFRA,1,0.1\n");
    CHECK(code_of([&] { parse_quotes(bad_type); }) == ErrorCode::parse);
    CHECK(code_of([] { load_quotes("/nonexistent/quotes.csv"); }) == ErrorCode::io);
}

TEST_CASE("bootstrap: single zero-rate deposit") {
    QuoteSet q;
    q.deposits.push_back({InstrumentType::deposit, 1.0, 0.0, 1});
    const ZeroCurve c = bootstrap(q);
    CHECK(c.discount(1.0) == 1.0);
    CHECK(c.zero_rate(1.0) == 0.0);
}

TEST_CASE("bootstrap inverts flat curves") {
    for (double rate : {0.01, -0.005, 0.0}) {
        const QuoteSet q = oracle::flat_quotes(rate, kDepos, kSwaps);
        const ZeroCurve c = bootstrap(q);
        for (const Pillar& p : c.pillars()) CHECK(std::abs(p.zero_rate - rate) < 1e-10);
        for (double T = 0.1; T < 30.0; T += 0.37) CHECK(std::abs(c.zero_rate(T) - rate) < 1e-10);
    }
}

TEST_CASE("bootstrap reprices every instrument") {
    // A humped curve with negative short rates.
    QuoteSet q;
    q.deposits = {{InstrumentType::deposit, 0.25, -0.0045, 1}, {InstrumentType::deposit, 1.0, -0.003, 2}};
    const double swaps[][2] = {{2, -0.0029}, {3, -0.0025}, {5, -0.0015}, {7, -0.0004},
                               {10, 0.0011}, {15, 0.003},  {20, 0.0037}, {30, 0.0037}};
    std::size_t row = 3;
    for (auto& s : swaps) q.swaps.push_back({InstrumentType::swap, s[0], s[1], row++});
    const ZeroCurve c = bootstrap(q);
    for (const Quote& d : q.deposits) CHECK(std::abs(implied_quote(c, d) - d.rate) < 1e-10);
    for (const Quote& s : q.swaps) CHECK(std::abs(implied_quote(c, s) - s.rate) < 1e-10);
    for (const Pillar& p : c.pillars()) {
        CHECK(p.discount > 0.0);
        CHECK(std::abs(p.discount - std::exp(-p.zero_rate * p.maturity)) < 1e-14);
    }
    // Negative rates: discount factors above one are allowed.
    CHECK(c.discount(1.0) > 1.0);
}

TEST_CASE("bootstrap failure") {
    QuoteSet q;
    q.deposits.push_back({InstrumentType::deposit, 1.0, -1.5, 1});
    CHECK(code_of([&] { bootstrap(q); }) == ErrorCode::bootstrap_failure);
}

TEST_CASE("curve lookups") {
    const ZeroCurve c = ZeroCurve::from_zero_rates({1, 2, 5}, {0.0, 0.01, 0.015});
    CHECK(c.discount(0.0) == 1.0);
    CHECK(c.zero_rate(2.0) == 0.01);
    CHECK(c.discount(5.0) == std::exp(-0.015 * 5.0));
    CHECK(code_of([&] { c.discount(5.5); }) == ErrorCode::extrapolation);
    CHECK(code_of([&] { c.discount(-1.0); }) == ErrorCode::domain);
    CHECK(market_forward_rate(c, 1.0, 2.0) == doctest::Approx(0.02).epsilon(1e-14));
    CHECK(code_of([&] { market_forward_rate(c, 2.0, 2.0); }) == ErrorCode::domain);
    CHECK(market_forward_rate(c, 0.0, 2.0) == doctest::Approx(c.zero_rate(2.0)).epsilon(1e-15));
}

TEST_CASE("market forward zero-coupon prices") {
    const ZeroCurve flat = ZeroCurve::from_zero_rates({1, 2, 5}, {0.01, 0.01, 0.01});
    CHECK(market_forward_zcb(flat, 1.0, 3.0) == doctest::Approx(std::exp(-0.02)).epsilon(1e-14));
    CHECK(market_forward_rate(flat, 0.5, 4.0) == doctest::Approx(0.01).epsilon(1e-12));

    const ZeroCurve c = bootstrap(oracle::flat_quotes(0.004, kDepos, kSwaps));
    const ZeroCurve hump = ZeroCurve::from_zero_rates({0.5, 1, 2, 5, 10, 30}, {-0.005, -0.004, -0.002, 0.001, 0.004, 0.006});
    for (const ZeroCurve* cv : {&c, &hump}) {
        for (double t : {0.5, 1.0, 3.0, 7.5}) {
            for (double T : {t + 0.25, t + 2.0, 30.0}) {
                CHECK(std::abs(market_forward_zcb(*cv, t, T) * cv->discount(t) - cv->discount(T)) < 1e-14);
            }
        }
    }
    CHECK(std::abs(market_forward_zcb(hump, 5.0, 5.0 + 1e-9) - 1.0) < 1e-10);
}

TEST_CASE("spline") {
    const std::vector<double> x{0, 1, 2.5, 4}, y{1, 3, -1, 2};
    const NaturalCubicSpline s(x, y);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(s(x[i]) == y[i]);
    const NaturalCubicSpline flat(std::vector<double>{0, 1, 3}, std::vector<double>{0.5, 0.5, 0.5});
    for (double t = 0; t <= 3; t += 0.1) CHECK(std::abs(flat(t) - 0.5) < 1e-15);
    // Reproduces a straight line (natural end conditions are exact for it).
    const NaturalCubicSpline line(std::vector<double>{0, 1, 3, 7}, std::vector<double>{1, 3, 7, 15});
    CHECK(line(2.0) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(code_of([] { NaturalCubicSpline(std::vector<double>{0, 0}, std::vector<double>{1, 2}); }) ==
          ErrorCode::validation);
}

TEST_CASE("fixed leg schedule") {
    const auto s = fixed_leg_schedule(1.0, 3.0, 1);
    REQUIRE(s.size() == 3);
    CHECK(s[0] == 2.0);
    CHECK(s[2] == 4.0);
    const auto stub = fixed_leg_schedule(0.0, 2.5, 1);
    REQUIRE(stub.size() == 3);
    CHECK(stub[0] == doctest::Approx(0.5));
    CHECK(fixed_leg_schedule(0.0, 1.0, 2).size() == 2);
}

TEST_CASE("curve CSV round trip") {
    const ZeroCurve c = bootstrap(oracle::flat_quotes(-0.005, kDepos, kSwaps));
    std::stringstream ss;
    write_curve(ss, c);
    std::string header;
    std::getline(ss, header);
    CHECK(header == "maturity_years,zero_rate,discount");
    ss.seekg(0);
    const ZeroCurve back = parse_curve(ss);
    REQUIRE(back.pillars().size() == c.pillars().size());
    for (std::size_t i = 0; i < c.pillars().size(); ++i) {
        CHECK(back.pillars()[i].maturity == c.pillars()[i].maturity);
        CHECK(back.pillars()[i].zero_rate == c.pillars()[i].zero_rate);
    }
    std::istringstream bad("maturity_years,zero_rate,discount\n1,0.01,0.5\n");
    CHECK(code_of([&] { parse_curve(bad); }) == ErrorCode::validation);
}
