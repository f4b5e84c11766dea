#pragma once
//
// Forward zero-coupon comparison and swaption pricing.
//
// Model prices come from the simulated state at the expiry (closed-form bond
// prices on that state) and are discounted path-wise with exp(-int_0^t r ds)
// from the same PathSet. Market prices use Bachelier's formula on the
// curve-implied forward par rate. Payer convention, unit notional, annual
// fixed leg unless a spec says otherwise.
//

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cirdiff/core_model.hpp"
#include "cirdiff/marketdata.hpp"
#include "cirdiff/simulation.hpp"
#include "cirdiff/stats.hpp"

namespace cirdiff {

enum class SwaptionKind { payer, receiver };

struct SwaptionSpec {
    double maturity = 1.0;  // option expiry, years
    double tenor = 1.0;     // underlying swap length, years
    double strike = 0.0;
    SwaptionKind kind = SwaptionKind::payer;
    int frequency = 1;  // fixed-leg payments per year
};

void validate(const SwaptionSpec& s);

/// Mean over paths of P(t, T; x(t), y(t)) with a CLT interval.
McEstimate model_forward_zcb(const PathSet& p, double t, double T, double level = 0.99);

struct SwapRate {
    double rate = 0.0;
    double annuity = 0.0;
};

/// Forward par rate and annuity of a swap starting at `start` on the curve.
SwapRate par_swap_rate_and_annuity(const ZeroCurve& c, double start, double tenor, int frequency = 1);

/// Bachelier (normal) swaption price per unit notional.
double bachelier_price(const SwaptionSpec& spec, double forward, double annuity, double normal_vol);

/// Per-path ingredients of a swaption at expiry: stochastic discount factor
/// exp(-int_0^t r ds), annuity and par swap rate from model bond prices.
struct SwaptionPathValues {
    std::vector<double> discount;
    std::vector<double> annuity;
    std::vector<double> swap_rate;
};

SwaptionPathValues swaption_path_values(const PathSet& p, const SwaptionSpec& spec);

/// Discounted payoffs discount * annuity * max(+-(S - K), 0), one per path.
std::vector<double> swaption_payoffs(const SwaptionPathValues& v, const SwaptionSpec& spec);

McEstimate model_swaption_price(const PathSet& p, const SwaptionSpec& spec, double level = 0.99);

// -- grid report ------------------------------------------------------------

struct SwaptionQuote {
    double maturity = 0.0;
    double tenor = 0.0;
    double strike = 0.0;
    double normal_vol = 0.0;
    std::size_t row = 0;
};

/// Reads `maturity_years,tenor_years,strike,normal_vol`.
std::vector<SwaptionQuote> load_swaption_quotes(const std::filesystem::path& path);
std::vector<SwaptionQuote> parse_swaption_quotes(std::istream& in, const std::string& source = "<stream>");

struct SwaptionCell {
    SwaptionQuote quote;
    double forward = 0.0;  // curve forward par rate
    double annuity = 0.0;  // curve annuity
    double market_price = 0.0;
    McEstimate model;
    double difference = 0.0;  // model - market
};

struct SwaptionGrid {
    std::vector<double> maturities;
    std::vector<double> tenors;
    std::vector<std::optional<SwaptionCell>> cells;  // maturities x tenors, row-major
    std::vector<std::string> warnings;

    const std::optional<SwaptionCell>& at(std::size_t i, std::size_t j) const {
        return cells[i * tenors.size() + j];
    }
};

/// Prices every quoted cell (in parallel, one cell per task). Cells that are
/// missing or cannot be priced are left empty and reported in `warnings`.
SwaptionGrid swaption_grid_report(const PathSet& p, const ZeroCurve& c,
                                  std::span<const SwaptionQuote> quotes, double level = 0.99);

/// `maturity_years,tenor_years,strike,normal_vol,model_price,market_price,difference_bp,ci_low,ci_high`
void write_swaption_report(const std::filesystem::path& path, const SwaptionGrid& g);

}  // namespace cirdiff
