#include "cirdiff/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>

#include "cirdiff/csv.hpp"
#include "cirdiff/error.hpp"

namespace cirdiff {

void validate(const SwaptionSpec& s) {
    if (!(s.maturity > 0.0) || !(s.tenor > 0.0) || s.frequency < 1 || !std::isfinite(s.strike)) {
        fail(ErrorCode::domain, "swaption needs maturity > 0, tenor > 0, frequency >= 1, finite strike");
    }
}

McEstimate model_forward_zcb(const PathSet& p, double t, double T, double level) {
    if (!(T > t)) fail(ErrorCode::domain, "forward bond needs T > t");
    const std::size_t j = p.index_of(t);
    const DiffModel& m = p.model();
    const BondFactors fx = bond_factors(m.x, Leg::x, T - p.times()[j]);
    const BondFactors fy = bond_factors(m.y, Leg::y, T - p.times()[j]);
    const double a = fx.a * fy.a;
    std::vector<double> prices(p.paths());
    for (std::size_t k = 0; k < p.paths(); ++k) {
        prices[k] = a * std::exp(-fx.b * p.x(k, j) + fy.b * p.y(k, j));
    }
    return mc_estimate(prices, level);
}

SwapRate par_swap_rate_and_annuity(const ZeroCurve& c, double start, double tenor, int frequency) {
    const auto dates = fixed_leg_schedule(start, tenor, frequency);
    SwapRate out;
    double prev = start;
    for (double d : dates) {
        out.annuity += (d - prev) * c.discount(d);
        prev = d;
    }
    out.rate = (c.discount(start) - c.discount(dates.back())) / out.annuity;
    return out;
}

double bachelier_price(const SwaptionSpec& spec, double forward, double annuity, double normal_vol) {
    validate(spec);
    if (!(normal_vol >= 0.0) || !std::isfinite(normal_vol)) {
        fail(ErrorCode::domain, "normal volatility must be finite and >= 0");
    }
    const double omega = spec.kind == SwaptionKind::payer ? 1.0 : -1.0;
    const double moneyness = omega * (forward - spec.strike);
    const double s = normal_vol * std::sqrt(spec.maturity);
    if (s == 0.0) return annuity * std::max(moneyness, 0.0);
    const double d = moneyness / s;
    return annuity * (moneyness * normal_cdf(d) + s * normal_pdf(d));
}

SwaptionPathValues swaption_path_values(const PathSet& p, const SwaptionSpec& spec) {
    validate(spec);
    const std::size_t j = p.index_of(spec.maturity);
    const double t = p.times()[j];
    const DiffModel& m = p.model();
    const auto dates = fixed_leg_schedule(t, spec.tenor, spec.frequency);

    const std::size_t n = dates.size();
    std::vector<double> accrual(n), a(n), bx(n), by(n);
    double prev = t;
    for (std::size_t i = 0; i < n; ++i) {
        accrual[i] = dates[i] - prev;
        prev = dates[i];
        const BondFactors fx = bond_factors(m.x, Leg::x, dates[i] - t);
        const BondFactors fy = bond_factors(m.y, Leg::y, dates[i] - t);
        a[i] = fx.a * fy.a;
        bx[i] = fx.b;
        by[i] = fy.b;
    }

    SwaptionPathValues v;
    v.discount.resize(p.paths());
    v.annuity.resize(p.paths());
    v.swap_rate.resize(p.paths());
    const auto n_paths = static_cast<std::ptrdiff_t>(p.paths());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ki = 0; ki < n_paths; ++ki) {
        const auto k = static_cast<std::size_t>(ki);
        const double x = p.x(k, j);
        const double y = p.y(k, j);
        double annuity = 0.0;
        double last = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            last = a[i] * std::exp(-bx[i] * x + by[i] * y);
            annuity += accrual[i] * last;
        }
        v.discount[k] = p.discount(k, j);
        v.annuity[k] = annuity;
        v.swap_rate[k] = (1.0 - last) / annuity;
    }
    return v;
}

std::vector<double> swaption_payoffs(const SwaptionPathValues& v, const SwaptionSpec& spec) {
    const double omega = spec.kind == SwaptionKind::payer ? 1.0 : -1.0;
    std::vector<double> out(v.discount.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = v.discount[k] * v.annuity[k] * std::max(omega * (v.swap_rate[k] - spec.strike), 0.0);
    }
    return out;
}

McEstimate model_swaption_price(const PathSet& p, const SwaptionSpec& spec, double level) {
    const auto payoffs = swaption_payoffs(swaption_path_values(p, spec), spec);
    return mc_estimate(payoffs, level);
}

// -- grid report ------------------------------------------------------------

std::vector<SwaptionQuote> parse_swaption_quotes(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    if (!csv::next_line(in, line, line_no)) fail(ErrorCode::validation, source + ": no swaption quotes");
    if (csv::split(line) !=
        std::vector<std::string>{"maturity_years", "tenor_years", "strike", "normal_vol"}) {
        fail(ErrorCode::parse, source + ": expected header 'maturity_years,tenor_years,strike,normal_vol'");
    }
    std::vector<SwaptionQuote> out;
    while (csv::next_line(in, line, line_no)) {
        const auto f = csv::split(line);
        const std::string where = source + " row " + std::to_string(line_no);
        if (f.size() != 4) fail(ErrorCode::parse, where + ": expected 4 fields");
        SwaptionQuote q;
        q.row = line_no;
        q.maturity = csv::parse_double(f[0], where + " maturity_years");
        q.tenor = csv::parse_double(f[1], where + " tenor_years");
        q.strike = csv::parse_double(f[2], where + " strike");
        q.normal_vol = csv::parse_double(f[3], where + " normal_vol");
        if (!(q.maturity > 0.0) || !(q.tenor > 0.0) || q.normal_vol < 0.0) {
            fail(ErrorCode::validation, where + ": maturity and tenor must be positive, vol >= 0");
        }
        out.push_back(q);
    }
    if (out.empty()) fail(ErrorCode::validation, source + ": no swaption quotes");
    return out;
}

std::vector<SwaptionQuote> load_swaption_quotes(const std::filesystem::path& path) {
    auto in = csv::open_input(path);
    return parse_swaption_quotes(in, path.string());
}

SwaptionGrid swaption_grid_report(const PathSet& p, const ZeroCurve& c,
                                  std::span<const SwaptionQuote> quotes, double level) {
    SwaptionGrid g;
    for (const SwaptionQuote& q : quotes) {
        g.maturities.push_back(q.maturity);
        g.tenors.push_back(q.tenor);
    }
    auto uniq = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(g.maturities);
    uniq(g.tenors);
    g.cells.assign(g.maturities.size() * g.tenors.size(), std::nullopt);

    auto cell_index = [&](const SwaptionQuote& q) {
        const auto i = std::lower_bound(g.maturities.begin(), g.maturities.end(), q.maturity) - g.maturities.begin();
        const auto j = std::lower_bound(g.tenors.begin(), g.tenors.end(), q.tenor) - g.tenors.begin();
        return static_cast<std::size_t>(i) * g.tenors.size() + static_cast<std::size_t>(j);
    };

    std::vector<const SwaptionQuote*> tasks;
    std::vector<bool> taken(g.cells.size(), false);
    for (const SwaptionQuote& q : quotes) {
        const std::size_t idx = cell_index(q);
        if (taken[idx]) {
            std::ostringstream os;
            os << "duplicate quote " << q.maturity << "y x " << q.tenor << "y at row " << q.row << " ignored";
            g.warnings.push_back(os.str());
            continue;
        }
        taken[idx] = true;
        tasks.push_back(&q);
    }

    std::vector<std::optional<SwaptionCell>> priced(tasks.size());
    std::vector<std::string> errors(tasks.size());
    const auto n_tasks = static_cast<std::ptrdiff_t>(tasks.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t ti = 0; ti < n_tasks; ++ti) {
        const SwaptionQuote& q = *tasks[static_cast<std::size_t>(ti)];
        try {
            SwaptionSpec spec;
            spec.maturity = q.maturity;
            spec.tenor = q.tenor;
            spec.strike = q.strike;
            SwaptionCell cell;
            cell.quote = q;
            const SwapRate fwd = par_swap_rate_and_annuity(c, q.maturity, q.tenor, spec.frequency);
            cell.forward = fwd.rate;
            cell.annuity = fwd.annuity;
            cell.market_price = bachelier_price(spec, fwd.rate, fwd.annuity, q.normal_vol);
            cell.model = model_swaption_price(p, spec, level);
            cell.difference = cell.model.mean - cell.market_price;
            priced[static_cast<std::size_t>(ti)] = cell;
        } catch (const Error& e) {
            errors[static_cast<std::size_t>(ti)] = e.what();
        }
    }

    for (std::size_t t = 0; t < tasks.size(); ++t) {
        if (priced[t]) {
            g.cells[cell_index(*tasks[t])] = priced[t];
        } else {
            std::ostringstream os;
            os << "cell " << tasks[t]->maturity << "y x " << tasks[t]->tenor << "y (row " << tasks[t]->row
               << ") not priced: " << errors[t];
            g.warnings.push_back(os.str());
        }
    }
    for (std::size_t i = 0; i < g.maturities.size(); ++i) {
        for (std::size_t j = 0; j < g.tenors.size(); ++j) {
            if (!taken[i * g.tenors.size() + j]) {
                std::ostringstream os;
                os << "missing quote for " << g.maturities[i] << "y x " << g.tenors[j] << "y";
                g.warnings.push_back(os.str());
            }
        }
    }
    return g;
}

void write_swaption_report(const std::filesystem::path& path, const SwaptionGrid& g) {
    auto out = csv::open_output(path);
    out << "maturity_years,tenor_years,strike,normal_vol,model_price,market_price,difference_bp,ci_low,ci_high\n";
    for (const auto& cell : g.cells) {
        if (!cell) continue;
        out << csv::format(cell->quote.maturity) << ',' << csv::format(cell->quote.tenor) << ','
            << csv::format(cell->quote.strike) << ',' << csv::format(cell->quote.normal_vol) << ','
            << csv::format(cell->model.mean) << ',' << csv::format(cell->market_price) << ','
            << csv::format(cell->difference * 1e4) << ',' << csv::format(cell->model.ci_low) << ','
            << csv::format(cell->model.ci_high) << '\n';
    }
}

}  // namespace cirdiff
