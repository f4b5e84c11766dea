#include "cirdiff/marketdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "cirdiff/csv.hpp"
#include "cirdiff/error.hpp"

namespace cirdiff {

namespace {

constexpr double kMaturityTol = 1e-12;
constexpr double kRepriceTol = 1e-10;

std::string row_name(const std::string& source, std::size_t row) {
    return source + " row " + std::to_string(row);
}

}  // namespace

// -- dates ------------------------------------------------------------------

Date parse_iso_date(const std::string& text) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    char tail = 0;
    if (text.size() != 10 || std::sscanf(text.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
        fail(ErrorCode::parse, "'" + text + "' is not an ISO date (YYYY-MM-DD)");
    }
    const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) fail(ErrorCode::parse, "'" + text + "' is not a calendar date");
    return date;
}

std::string format_iso_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

double year_fraction(const Date& from, const Date& to) {
    const auto days = (std::chrono::sys_days{to} - std::chrono::sys_days{from}).count();
    return static_cast<double>(days) / 365.0;
}

// -- quotes -----------------------------------------------------------------

QuoteSet parse_quotes(std::istream& in, const std::string& source) {
    QuoteSet q;
    std::string line;
    std::size_t line_no = 0;
    if (!csv::next_line(in, line, line_no)) fail(ErrorCode::validation, source + ": no instruments");
    const auto header = csv::split(line);
    if (header != std::vector<std::string>{"type", "tenor_years", "rate"}) {
        fail(ErrorCode::parse, source + ": expected header 'type,tenor_years,rate'");
    }
    while (csv::next_line(in, line, line_no)) {
        const auto fields = csv::split(line);
        const std::string where = row_name(source, line_no);
        if (fields.size() != 3) fail(ErrorCode::parse, where + ": expected 3 fields");
        Quote quote;
        quote.row = line_no;
        quote.tenor = csv::parse_double(fields[1], where + " tenor_years");
        quote.rate = csv::parse_double(fields[2], where + " rate");
        if (fields[0] == "DEPO") {
            quote.type = InstrumentType::deposit;
            q.deposits.push_back(quote);
        } else if (fields[0] == "SWAP") {
            quote.type = InstrumentType::swap;
            q.swaps.push_back(quote);
        } else {
            fail(ErrorCode::parse, where + ": unknown instrument type '" + fields[0] + "'");
        }
    }
    validate(q);
    return q;
}

QuoteSet load_quotes(const std::filesystem::path& path) {
    auto in = csv::open_input(path);
    return parse_quotes(in, path.string());
}

void validate(const QuoteSet& q) {
    if (q.deposits.empty() && q.swaps.empty()) fail(ErrorCode::validation, "no instruments");
    auto check_list = [](const std::vector<Quote>& list, const char* kind) {
        for (std::size_t i = 0; i < list.size(); ++i) {
            const Quote& qt = list[i];
            std::ostringstream where;
            where << kind << " at row " << qt.row << " (tenor " << qt.tenor << ")";
            if (!(qt.tenor > 0.0) || !std::isfinite(qt.rate)) {
                fail(ErrorCode::validation, where.str() + ": tenor must be positive, rate finite");
            }
            if (i > 0 && !(qt.tenor > list[i - 1].tenor)) {
                fail(ErrorCode::validation,
                     where.str() + ": maturities must be strictly increasing without duplicates");
            }
        }
    };
    check_list(q.deposits, "deposit");
    check_list(q.swaps, "swap");
    for (const Quote& d : q.deposits) {
        if (d.tenor > 1.0 + kMaturityTol) {
            fail(ErrorCode::validation,
                 "deposit at row " + std::to_string(d.row) + ": tenor exceeds one year");
        }
    }
    if (!q.deposits.empty() && !q.swaps.empty() && !(q.swaps.front().tenor > q.deposits.back().tenor)) {
        fail(ErrorCode::validation, "swap at row " + std::to_string(q.swaps.front().row) +
                                        ": must mature after the last deposit");
    }
}

std::vector<double> fixed_leg_schedule(double start, double tenor, int freq) {
    if (!(tenor > 0.0) || freq < 1 || !(start >= 0.0)) {
        fail(ErrorCode::domain, "swap schedule needs start >= 0, tenor > 0 and frequency >= 1");
    }
    const double step = 1.0 / freq;
    const double end = start + tenor;
    std::vector<double> dates;
    // Roll back from the end date; a remainder below 1e-9 years is not a stub.
    for (int i = 0;; ++i) {
        const double d = end - i * step;
        if (d <= start + 1e-9) break;
        dates.push_back(d);
    }
    std::reverse(dates.begin(), dates.end());
    return dates;
}

// -- curve ------------------------------------------------------------------

ZeroCurve ZeroCurve::from_zero_rates(std::vector<double> maturities, std::vector<double> rates) {
    if (maturities.empty() || maturities.size() != rates.size()) {
        fail(ErrorCode::validation, "curve needs matching, non-empty maturity and rate arrays");
    }
    ZeroCurve c;
    for (std::size_t i = 0; i < maturities.size(); ++i) {
        if (!(maturities[i] > 0.0) || !std::isfinite(maturities[i]) || !std::isfinite(rates[i])) {
            fail(ErrorCode::validation, "curve pillars need positive maturities and finite rates");
        }
        if (i > 0 && !(maturities[i] > maturities[i - 1])) {
            fail(ErrorCode::validation, "curve pillar maturities must be strictly increasing");
        }
        c.pillars_.push_back({maturities[i], rates[i], std::exp(-rates[i] * maturities[i])});
    }
    c.spline_ = NaturalCubicSpline(maturities, rates);
    return c;
}

std::vector<double> ZeroCurve::maturities() const {
    std::vector<double> out;
    out.reserve(pillars_.size());
    for (const Pillar& p : pillars_) out.push_back(p.maturity);
    return out;
}

double ZeroCurve::last_maturity() const {
    if (pillars_.empty()) fail(ErrorCode::validation, "curve has no pillars");
    return pillars_.back().maturity;
}

void ZeroCurve::check_range(double T) const {
    if (!(T >= 0.0)) fail(ErrorCode::domain, "curve maturity must be >= 0");
    if (T > last_maturity() + kMaturityTol) {
        std::ostringstream os;
        os << "maturity " << T << " is beyond the last pillar " << last_maturity()
           << " (no extrapolation)";
        fail(ErrorCode::extrapolation, os.str());
    }
}

double ZeroCurve::zero_rate(double T) const {
    check_range(T);
    for (const Pillar& p : pillars_) {
        if (p.maturity == T) return p.zero_rate;
    }
    return spline_(T);
}

double ZeroCurve::discount(double T) const {
    check_range(T);
    if (T == 0.0) return 1.0;
    for (const Pillar& p : pillars_) {
        if (p.maturity == T) return p.discount;
    }
    return std::exp(-spline_(T) * T);
}

double implied_quote(const ZeroCurve& c, const Quote& q) {
    if (q.type == InstrumentType::deposit) {
        return (1.0 / c.discount(q.tenor) - 1.0) / q.tenor;
    }
    const auto dates = fixed_leg_schedule(0.0, q.tenor, 1);
    double annuity = 0.0;
    double prev = 0.0;
    for (double d : dates) {
        annuity += (d - prev) * c.discount(d);
        prev = d;
    }
    return (1.0 - c.discount(q.tenor)) / annuity;
}

ZeroCurve bootstrap(const QuoteSet& q) {
    validate(q);
    std::vector<double> mats;
    std::vector<double> rates;
    for (const Quote& d : q.deposits) {
        const double growth = 1.0 + d.rate * d.tenor;
        if (!(growth > 0.0)) {
            fail(ErrorCode::bootstrap_failure,
                 "deposit at row " + std::to_string(d.row) + " gives a non-positive discount factor");
        }
        mats.push_back(d.tenor);
        rates.push_back(std::log(growth) / d.tenor);  // -log D / T
    }
    const std::size_t first_swap = mats.size();
    for (const Quote& s : q.swaps) {
        mats.push_back(s.tenor);
        rates.push_back(rates.empty() ? s.rate : rates.back());
    }

    // The spline is global, so a new pillar moves the curve between earlier
    // pillars too. Sweep Gauss-Seidel style until every swap reprices.
    auto swap_error = [&](std::size_t j) {
        const ZeroCurve c = ZeroCurve::from_zero_rates(mats, rates);
        return implied_quote(c, q.swaps[j - first_swap]) - q.swaps[j - first_swap].rate;
    };
    double worst = 0.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        for (std::size_t j = first_swap; j < mats.size(); ++j) {
            // Secant on the pillar rate; the par rate is close to linear in it.
            double r0 = rates[j];
            double e0 = swap_error(j);
            double r1 = r0 + 1e-4;
            rates[j] = r1;
            double e1 = swap_error(j);
            for (int it = 0; it < 60 && std::abs(e1) > 1e-16; ++it) {
                if (e1 == e0) break;
                const double r2 = r1 - e1 * (r1 - r0) / (e1 - e0);
                r0 = r1;
                e0 = e1;
                r1 = r2;
                rates[j] = r1;
                e1 = swap_error(j);
            }
            if (!std::isfinite(rates[j])) {
                fail(ErrorCode::bootstrap_failure,
                     "swap at row " + std::to_string(q.swaps[j - first_swap].row) + " did not solve");
            }
        }
        worst = 0.0;
        for (std::size_t j = first_swap; j < mats.size(); ++j) worst = std::max(worst, std::abs(swap_error(j)));
        if (worst < 1e-14) break;
    }
    if (!(worst <= kRepriceTol)) {
        std::ostringstream os;
        os << "bootstrap did not reprice the swaps (worst par-rate error " << worst << ")";
        fail(ErrorCode::bootstrap_failure, os.str());
    }
    return ZeroCurve::from_zero_rates(std::move(mats), std::move(rates));
}

double market_forward_rate(const ZeroCurve& c, double t, double T) {
    if (!(t >= 0.0) || !(T > t)) fail(ErrorCode::domain, "forward rate needs 0 <= t < T");
    const double tail = t == 0.0 ? 0.0 : t * c.zero_rate(t);
    return (T * c.zero_rate(T) - tail) / (T - t);
}

double market_forward_zcb(const ZeroCurve& c, double t, double T) {
    return std::exp(-market_forward_rate(c, t, T) * (T - t));
}

// -- curve CSV --------------------------------------------------------------

void write_curve(std::ostream& out, const ZeroCurve& c) {
    out << "maturity_years,zero_rate,discount\n";
    for (const Pillar& p : c.pillars()) {
        out << csv::format(p.maturity) << ',' << csv::format(p.zero_rate) << ','
            << csv::format(p.discount) << '\n';
    }
}

void write_curve(const std::filesystem::path& path, const ZeroCurve& c) {
    auto out = csv::open_output(path);
    write_curve(out, c);
}

ZeroCurve parse_curve(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    if (!csv::next_line(in, line, line_no)) fail(ErrorCode::validation, source + ": empty curve file");
    if (csv::split(line) != std::vector<std::string>{"maturity_years", "zero_rate", "discount"}) {
        fail(ErrorCode::parse, source + ": expected header 'maturity_years,zero_rate,discount'");
    }
    std::vector<double> mats;
    std::vector<double> rates;
    while (csv::next_line(in, line, line_no)) {
        const auto fields = csv::split(line);
        const std::string where = row_name(source, line_no);
        if (fields.size() != 3) fail(ErrorCode::parse, where + ": expected 3 fields");
        const double T = csv::parse_double(fields[0], where + " maturity_years");
        const double R = csv::parse_double(fields[1], where + " zero_rate");
        const double D = csv::parse_double(fields[2], where + " discount");
        if (std::abs(D - std::exp(-R * T)) > 1e-4) {
            fail(ErrorCode::validation, where + ": discount is inconsistent with exp(-zero_rate * T)");
        }
        mats.push_back(T);
        rates.push_back(R);
    }
    if (mats.empty()) fail(ErrorCode::validation, source + ": no curve pillars");
    return ZeroCurve::from_zero_rates(std::move(mats), std::move(rates));
}

ZeroCurve load_curve(const std::filesystem::path& path) {
    auto in = csv::open_input(path);
    return parse_curve(in, path.string());
}

}  // namespace cirdiff
