#pragma once
//
// Market quotes, curve bootstrapping and curve-implied forward quantities.
//
// Conventions: year fractions ACT/365F; deposits use simple compounding
// D(T) = 1 / (1 + r T); par swaps pay an annual fixed leg (a short first
// period when the maturity is not a whole number of years); the curve
// interpolates the continuously compounded zero rate with a natural cubic
// spline, holds it flat before the first pillar and refuses to extrapolate
// beyond the last.
//

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cirdiff/spline.hpp"

namespace cirdiff {

// -- dates ------------------------------------------------------------------

using Date = std::chrono::year_month_day;

/// Parses YYYY-MM-DD; throws parse on anything else.
Date parse_iso_date(const std::string& text);
std::string format_iso_date(const Date& d);

/// ACT/365F.
double year_fraction(const Date& from, const Date& to);

// -- quotes -----------------------------------------------------------------

enum class InstrumentType { deposit, swap };

struct Quote {
    InstrumentType type = InstrumentType::deposit;
    double tenor = 0.0;  // years
    double rate = 0.0;   // decimal; negative allowed
    std::size_t row = 0; // 1-based line in the source file, 0 if synthetic
};

struct QuoteSet {
    std::vector<Quote> deposits;
    std::vector<Quote> swaps;
    std::string valuation_date;  // ISO date, informational
};

/// Reads the `type,tenor_years,rate` CSV.
QuoteSet load_quotes(const std::filesystem::path& path);
QuoteSet parse_quotes(std::istream& in, const std::string& source = "<stream>");

/// Throws validation unless tenors are positive, strictly increasing within
/// each list, deposits are <= 1y and every swap matures after the last deposit.
void validate(const QuoteSet& q);

/// Fixed-leg payment times of a swap starting at `start`, paying `freq` times a
/// year up to start + tenor; the first period absorbs any stub.
std::vector<double> fixed_leg_schedule(double start, double tenor, int freq);

// -- curve ------------------------------------------------------------------

struct Pillar {
    double maturity = 0.0;   // years
    double zero_rate = 0.0;  // continuously compounded
    double discount = 1.0;
};

class ZeroCurve {
public:
    ZeroCurve() = default;

    /// Pillars from continuously compounded zero rates; discounts are derived.
    static ZeroCurve from_zero_rates(std::vector<double> maturities, std::vector<double> rates);

    double zero_rate(double T) const;
    double discount(double T) const;

    const std::vector<Pillar>& pillars() const { return pillars_; }
    std::vector<double> maturities() const;
    double last_maturity() const;

private:
    void check_range(double T) const;

    std::vector<Pillar> pillars_;
    NaturalCubicSpline spline_;
};

ZeroCurve bootstrap(const QuoteSet& q);

/// Quoted rate implied by the curve: 1 / (1 + r T) for deposits, the annual
/// par rate for swaps.
double implied_quote(const ZeroCurve& c, const Quote& q);

/// R(t,T) = (T R(0,T) - t R(0,t)) / (T - t), for 0 <= t < T.
double market_forward_rate(const ZeroCurve& c, double t, double T);

/// exp(-R(t,T) (T - t)).
double market_forward_zcb(const ZeroCurve& c, double t, double T);

/// Curve CSV with header `maturity_years,zero_rate,discount`.
void write_curve(std::ostream& out, const ZeroCurve& c);
void write_curve(const std::filesystem::path& path, const ZeroCurve& c);

/// Reads the curve CSV. Zero rates are authoritative; the discount column is
/// only checked for consistency at a loose tolerance since published tables
/// are rounded.
ZeroCurve load_curve(const std::filesystem::path& path);
ZeroCurve parse_curve(std::istream& in, const std::string& source = "<stream>");

}  // namespace cirdiff
