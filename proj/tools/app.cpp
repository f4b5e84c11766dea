#include "app.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <type_traits>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cirdiff/csv.hpp"
#include "cirdiff/error.hpp"
#include "cirdiff/json_io.hpp"
#include "cirdiff/marketdata.hpp"
#include "cirdiff/pricing.hpp"
#include "cirdiff/stats.hpp"

namespace cirdiff::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(ErrorCode::validation, where + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            fail(ErrorCode::validation, where + ": unknown key '" + key + "'");
        }
    }
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
    try {
        if constexpr (std::is_unsigned_v<T>) {
            // get<unsigned>() would silently wrap negative numbers.
            if (!j.at(key).is_number_unsigned()) fail(ErrorCode::validation, where + ": '" + key + "' must be a nonnegative integer");
        }
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        fail(ErrorCode::validation, where + ": bad value for '" + key + "'");
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

int exit_code_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::non_convergence:
        case ErrorCode::bootstrap_failure:
            return kExitNumeric;
        default:
            return kExitInput;
    }
}

std::string format_time_tag(double t) {
    std::string s = csv::format(t);
    std::replace(s.begin(), s.end(), '.', 'p');
    return s;
}

// One run of the pipeline; each stage is computed once and reused.
class Pipeline {
public:
    Pipeline(RunConfig cfg, std::ostream& out, std::ostream& err) : cfg_(std::move(cfg)), out_(out), err_(err) {}

    int bootstrap_cmd() {
        curve();
        return finish("bootstrap");
    }
    int calibrate_cmd() {
        calibration();
        return finish("calibrate");
    }
    int simulate_cmd() {
        simulation_outputs();
        return finish("simulate");
    }
    int price_cmd() {
        pricing_outputs();
        return finish("price");
    }
    int report_cmd() {
        curve();
        if (!cfg_.model) calibration();
        simulation_outputs();
        pricing_outputs();
        return finish("report");
    }

private:
    void warn(const std::string& msg) {
        err_ << "warning: " << msg << '\n';
        warnings_.push_back(msg);
    }

    fs::path output(const std::string& name) {
        fs::create_directories(cfg_.output_dir);
        written_.push_back(name);
        return cfg_.output_dir / name;
    }

    const ZeroCurve& curve() {
        if (curve_) return *curve_;
        if (cfg_.quotes) {
            QuoteSet q = load_quotes(*cfg_.quotes);
            curve_ = cirdiff::bootstrap(q);
            out_ << "bootstrapped " << q.deposits.size() + q.swaps.size() << " instruments from "
                 << cfg_.quotes->string() << '\n';
        } else {
            curve_ = load_curve(*cfg_.curve);
            out_ << "loaded curve " << cfg_.curve->string() << '\n';
        }
        write_curve(output("curve.csv"), *curve_);
        return *curve_;
    }

    const DiffModel& model() {
        if (cfg_.model) return *cfg_.model;
        return calibration().model;
    }

    const CalibrationResult& calibration() {
        if (calibration_) return *calibration_;
        const ZeroCurve& c = curve();
        const std::vector<double> mats =
            cfg_.calibration_maturities.empty() ? c.maturities() : cfg_.calibration_maturities;
        const CalibrationTarget target = CalibrationTarget::from_curve(c, mats);
        calibration_ = calibrate(target, cfg_.guess, cfg_.calibration);
        const CalibrationResult& r = *calibration_;
        if (r.guess_projected) warn("initial guess is not admissible; projected onto the admissible set");
        if (!r.converged) {
            warn("calibration did not converge; reporting the best iterate");
            numeric_failure_ = true;
        }
        {
            auto f = csv::open_output(output("calibration.json"));
            f << to_json(r).dump(2) << '\n';
        }
        {
            const auto model_p = model_prices(r.pi_star, target.maturities);
            auto f = csv::open_output(output("zc_fit.csv"));
            f << "maturity_years,market_price,model_price,abs_error,rel_error\n";
            for (std::size_t i = 0; i < target.maturities.size(); ++i) {
                f << csv::format(target.maturities[i]) << ',' << csv::format(target.market[i]) << ','
                  << csv::format(model_p[i]) << ',' << csv::format(std::abs(target.market[i] - model_p[i])) << ','
                  << csv::format(target.market[i] / model_p[i] - 1.0) << '\n';
            }
        }
        out_ << "calibrated: objective " << r.objective << ", MRE " << 100.0 * r.mre << "%, " << r.iterations
             << " iterations" << (r.converged ? "" : " (not converged)") << '\n';
        return r;
    }

    std::vector<SwaptionQuote>* swaption_quotes() {
        if (swaption_checked_) return swaption_quotes_ ? &*swaption_quotes_ : nullptr;
        swaption_checked_ = true;
        if (!cfg_.swaptions) return nullptr;
        if (!fs::exists(*cfg_.swaptions)) {
            warn("swaption file " + cfg_.swaptions->string() + " not found; swaption step skipped");
            return nullptr;
        }
        swaption_quotes_ = load_swaption_quotes(*cfg_.swaptions);
        return &*swaption_quotes_;
    }

    // Pillar maturities snapped to the Euler grid, within the horizon.
    std::vector<double> df_maturities() {
        std::vector<double> out;
        for (double T : curve().maturities()) {
            const double g = nearest_grid_time(T, cfg_.simulation.delta);
            if (g > 0.0 && g <= cfg_.simulation.horizon + 1e-12 && (out.empty() || g > out.back())) out.push_back(g);
        }
        return out;
    }

    const PathSet& paths() {
        if (paths_) return *paths_;
        SimConfig sc = cfg_.simulation;
        std::set<double> extra;
        for (double t : df_maturities()) extra.insert(t);
        for (double t : cfg_.forward_times) extra.insert(t);
        if (auto* q = swaption_quotes()) {
            for (const auto& s : *q) extra.insert(s.maturity);
        }
        extra.insert(distribution_time());
        for (double t : extra) {
            if (t < 0.0 || t > sc.horizon + 1e-12) {
                fail(ErrorCode::grid, "requested time " + csv::format(t) + " is outside [0, horizon]");
            }
        }
        sc.record_times.assign(extra.begin(), extra.end());
        validate(sc);
        paths_ = simulate(model(), sc);
        out_ << "simulated " << sc.paths << " paths, " << grid_steps(sc) << " steps of " << sc.delta << '\n';
        return *paths_;
    }

    double distribution_time() const { return cfg_.distribution_time.value_or(cfg_.simulation.horizon); }

    void simulation_outputs() {
        validate(cfg_.simulation);
        const PathSet& p = paths();
        const DiffModel& m = model();

        const auto mats = df_maturities();
        write_discount_csv(output("df_comparison.csv"), p, discount_factors(p, mats, cfg_.df_level));

        const DistributionSummary d = distribution_summary(p, distribution_time(), cfg_.bins);
        {
            auto f = csv::open_output(output("distribution.csv"));
            f << "bin_lo,bin_hi,count,density,normal_density\n";
            for (const auto& b : d.histogram) {
                f << csv::format(b.lo) << ',' << csv::format(b.hi) << ',' << b.count << ','
                  << csv::format(b.density) << ',' << csv::format(b.normal_density) << '\n';
            }
        }
        {
            auto f = csv::open_output(output("distribution_summary.csv"));
            f << "t,samples,mean,variance,skewness,excess_kurtosis,se_mean,se_variance,se_skewness,"
                 "se_kurtosis,analytic_mean,analytic_variance\n";
            f << csv::format(d.t) << ',' << d.samples << ',' << csv::format(d.mean) << ',' << csv::format(d.variance)
              << ',' << csv::format(d.skewness) << ',' << csv::format(d.excess_kurtosis) << ','
              << csv::format(d.se_mean) << ',' << csv::format(d.se_variance) << ',' << csv::format(d.se_skewness)
              << ',' << csv::format(d.se_kurtosis) << ',' << csv::format(cond_mean(m, m.x.z0, m.y.z0, d.t)) << ','
              << csv::format(cond_var(m, m.x.z0, m.y.z0, d.t)) << '\n';
        }
        {
            auto f = csv::open_output(output("mean_std.csv"));
            f << "time,mc_mean,mc_std,analytic_mean,analytic_std\n";
            std::vector<double> col(p.paths());
            for (std::size_t j = 0; j < p.points(); ++j) {
                for (std::size_t k = 0; k < p.paths(); ++k) col[k] = p.r(k, j);
                const double mean = neumaier_sum(col) / static_cast<double>(col.size());
                for (double& v : col) v = (v - mean) * (v - mean);
                const double var =
                    col.size() > 1 ? neumaier_sum(col) / static_cast<double>(col.size() - 1) : 0.0;
                const double t = p.times()[j];
                f << csv::format(t) << ',' << csv::format(mean) << ',' << csv::format(std::sqrt(var)) << ','
                  << csv::format(cond_mean(m, m.x.z0, m.y.z0, t)) << ','
                  << csv::format(std::sqrt(cond_var(m, m.x.z0, m.y.z0, t))) << '\n';
            }
        }
        if (cfg_.trajectory_paths > 0) {
            // Substreams are keyed by path index, so a small full-resolution
            // run reproduces the first paths of the main run exactly.
            SimConfig sc = cfg_.simulation;
            sc.paths = std::min(cfg_.trajectory_paths, sc.paths);
            sc.record_stride = 1;
            sc.record_times.clear();
            const PathSet traj = simulate(m, sc);
            export_paths(output("trajectory.csv"), traj, sc.paths);
            written_.push_back("trajectory.json");
        }
    }

    void pricing_outputs() {
        validate(cfg_.simulation);
        const ZeroCurve& c = curve();
        const PathSet& p = paths();
        for (double t : cfg_.forward_times) {
            auto f = csv::open_output(output("forward_zcb_t" + format_time_tag(t) + ".csv"));
            f << "maturity_years,model_mean,std_err,ci_low,ci_high,market,abs_error\n";
            for (double T : c.maturities()) {
                if (!(T > t)) continue;
                const McEstimate e = model_forward_zcb(p, t, T, cfg_.pricing_level);
                const double market = market_forward_zcb(c, t, T);
                f << csv::format(T) << ',' << csv::format(e.mean) << ',' << csv::format(e.std_err) << ','
                  << csv::format(e.ci_low) << ',' << csv::format(e.ci_high) << ',' << csv::format(market) << ','
                  << csv::format(std::abs(e.mean - market)) << '\n';
            }
        }
        if (auto* q = swaption_quotes()) {
            const SwaptionGrid g = swaption_grid_report(p, c, *q, cfg_.pricing_level);
            for (const auto& w : g.warnings) warn(w);
            write_swaption_report(output("swaption_report.csv"), g);
        }
    }

    int finish(const std::string& command) {
        nlohmann::ordered_json man;
        man["command"] = command;
        man["valuation_date"] = cfg_.valuation_date;
        if (cfg_.quotes) man["quotes"] = cfg_.quotes->filename().string();
        if (cfg_.curve) man["curve"] = cfg_.curve->filename().string();
        if (calibration_ || cfg_.model) man["model"] = model_to_json(model());
        if (paths_) {
            const SimConfig& sc = paths_->config();
            man["simulation"] = {{"seed", sc.seed}, {"delta", sc.delta}, {"paths", sc.paths},
                                 {"horizon", sc.horizon}, {"record_stride", sc.record_stride}};
        }
        written_.push_back("manifest.json");
        man["outputs"] = written_;
        man["warnings"] = warnings_;
        auto f = csv::open_output(cfg_.output_dir / "manifest.json");
        f << man.dump(2) << '\n';
        out_ << "wrote " << written_.size() << " files to " << cfg_.output_dir.string() << '\n';
        return numeric_failure_ ? kExitNumeric : kExitOk;
    }

    RunConfig cfg_;
    std::ostream& out_;
    std::ostream& err_;
    std::vector<std::string> written_;
    std::vector<std::string> warnings_;
    bool numeric_failure_ = false;

    std::optional<ZeroCurve> curve_;
    std::optional<CalibrationResult> calibration_;
    std::optional<PathSet> paths_;
    bool swaption_checked_ = false;
    std::optional<std::vector<SwaptionQuote>> swaption_quotes_;
};

}  // namespace

// -- config -------------------------------------------------------------------

PhiVector parse_guess(const std::string& text) {
    PhiVector p;
    const auto fields = csv::split(text);
    if (fields.size() != 8) fail(ErrorCode::validation, "--guess needs 8 comma-separated numbers");
    for (std::size_t i = 0; i < 8; ++i) p[i] = csv::parse_double(fields[i], "--guess");
    return p;
}

RunConfig parse_run_config(const std::string& text, const fs::path& base) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::parse, std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j, "config", {"valuation_date", "quotes", "curve", "output_dir", "model", "calibration",
                             "simulation", "pricing"});
    RunConfig c;
    if (j.contains("valuation_date")) {
        c.valuation_date = get<std::string>(j, "valuation_date", "config");
        parse_iso_date(c.valuation_date);
    }
    if (j.contains("quotes")) c.quotes = resolve(base, get<std::string>(j, "quotes", "config"));
    if (j.contains("curve")) c.curve = resolve(base, get<std::string>(j, "curve", "config"));
    if (j.contains("output_dir")) c.output_dir = resolve(base, get<std::string>(j, "output_dir", "config"));
    if (j.contains("model")) c.model = model_from_json(j["model"]);

    if (j.contains("calibration")) {
        const json& s = j["calibration"];
        const std::string w = "config.calibration";
        check_keys(s, w, {"guess", "multistart", "seed", "method", "max_iterations", "gradient_tol", "step_tol",
                          "maturities", "penalty_fallback"});
        if (s.contains("guess")) {
            const auto g = get<std::vector<double>>(s, "guess", w);
            if (g.size() != 8) fail(ErrorCode::validation, w + ".guess needs 8 numbers");
            std::copy(g.begin(), g.end(), c.guess.pi.begin());
        }
        if (s.contains("multistart")) c.calibration.multistart = get<std::size_t>(s, "multistart", w);
        if (s.contains("seed")) c.calibration.seed = get<std::uint64_t>(s, "seed", w);
        if (s.contains("max_iterations")) c.calibration.max_iterations = get<int>(s, "max_iterations", w);
        if (s.contains("gradient_tol")) c.calibration.gradient_tol = get<double>(s, "gradient_tol", w);
        if (s.contains("step_tol")) c.calibration.step_tol = get<double>(s, "step_tol", w);
        if (s.contains("penalty_fallback")) c.calibration.penalty_fallback = get<bool>(s, "penalty_fallback", w);
        if (s.contains("maturities")) c.calibration_maturities = get<std::vector<double>>(s, "maturities", w);
        if (s.contains("method")) {
            const auto m = get<std::string>(s, "method", w);
            if (m == "projected-lm") {
                c.calibration.method = CalibrationMethod::projected_lm;
            } else if (m == "penalty") {
                c.calibration.method = CalibrationMethod::penalty;
            } else {
                fail(ErrorCode::validation, w + ".method must be 'projected-lm' or 'penalty'");
            }
        }
    }
    if (j.contains("simulation")) {
        const json& s = j["simulation"];
        const std::string w = "config.simulation";
        check_keys(s, w, {"horizon", "delta", "paths", "seed", "record_stride", "trajectory_paths",
                          "distribution_time", "bins", "df_level"});
        if (s.contains("horizon")) c.simulation.horizon = get<double>(s, "horizon", w);
        if (s.contains("delta")) c.simulation.delta = get<double>(s, "delta", w);
        if (s.contains("paths")) c.simulation.paths = get<std::size_t>(s, "paths", w);
        if (s.contains("seed")) c.simulation.seed = get<std::uint64_t>(s, "seed", w);
        if (s.contains("record_stride")) c.simulation.record_stride = get<std::size_t>(s, "record_stride", w);
        if (s.contains("trajectory_paths")) c.trajectory_paths = get<std::size_t>(s, "trajectory_paths", w);
        if (s.contains("distribution_time")) c.distribution_time = get<double>(s, "distribution_time", w);
        if (s.contains("bins")) c.bins = get<std::size_t>(s, "bins", w);
        if (s.contains("df_level")) c.df_level = get<double>(s, "df_level", w);
    }
    if (j.contains("pricing")) {
        const json& s = j["pricing"];
        const std::string w = "config.pricing";
        check_keys(s, w, {"forward_times", "swaptions", "level"});
        if (s.contains("forward_times")) c.forward_times = get<std::vector<double>>(s, "forward_times", w);
        if (s.contains("swaptions")) c.swaptions = resolve(base, get<std::string>(s, "swaptions", w));
        if (s.contains("level")) c.pricing_level = get<double>(s, "level", w);
    }
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path.parent_path());
}

void validate(const RunConfig& c) {
    if (c.quotes.has_value() == c.curve.has_value()) {
        fail(ErrorCode::validation, "exactly one of 'quotes' or 'curve' must be given");
    }
    const fs::path& input = c.quotes ? *c.quotes : *c.curve;
    if (!fs::exists(input)) fail(ErrorCode::io, "input file not found: " + input.string());
    if (c.model) validate(*c.model);
    if (c.bins == 0) fail(ErrorCode::validation, "bins must be >= 1");
    for (double lvl : {c.df_level, c.pricing_level}) {
        if (!(lvl > 0.0 && lvl < 1.0)) fail(ErrorCode::validation, "confidence levels must lie in (0, 1)");
    }
}

// -- command line -------------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App cli{"CIR-difference short-rate model: curve bootstrap, calibration, Monte Carlo and pricing"};
    cli.require_subcommand(1);

    std::string config_path, quotes, curve, date, out_dir, guess;
    std::optional<std::uint64_t> seed;
    std::optional<double> delta;
    std::optional<std::size_t> paths, multistart;
    int threads = 0;

    std::vector<std::pair<std::string, CLI::App*>> subs;
    for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
             {"bootstrap", "bootstrap the zero curve from deposit and swap quotes"},
             {"calibrate", "calibrate the model to the curve"},
             {"simulate", "Monte Carlo statistics: discount factors, distribution, trajectories"},
             {"price", "forward zero-coupon comparison and swaption grid"},
             {"report", "run the whole pipeline"}}) {
        CLI::App* s = cli.add_subcommand(name, help);
        s->add_option("--config", config_path, "JSON run configuration");
        s->add_option("--quotes", quotes, "quotes CSV (type,tenor_years,rate)");
        s->add_option("--curve", curve, "curve CSV (maturity_years,zero_rate,discount)");
        s->add_option("--seed", seed, "simulation seed");
        s->add_option("--delta", delta, "Euler step in years");
        s->add_option("--paths", paths, "number of Monte Carlo paths");
        s->add_option("--date", date, "valuation date (YYYY-MM-DD)");
        s->add_option("--out", out_dir, "output directory");
        s->add_option("--guess", guess, "initial guess: 8 comma-separated numbers");
        s->add_option("--multistart", multistart, "number of extra random calibration starts");
        s->add_option("--threads", threads, "OpenMP threads (0 = runtime default)");
        subs.emplace_back(name, s);
    }

    try {
        cli.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << cli.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_run_config(config_path);
        if (!quotes.empty()) {
            cfg.quotes = quotes;
            cfg.curve.reset();
        }
        if (!curve.empty()) {
            cfg.curve = curve;
            if (quotes.empty()) cfg.quotes.reset();
        }
        if (!date.empty()) {
            parse_iso_date(date);
            cfg.valuation_date = date;
        }
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (!guess.empty()) cfg.guess = parse_guess(guess);
        if (seed) cfg.simulation.seed = *seed;
        if (delta) cfg.simulation.delta = *delta;
        if (paths) cfg.simulation.paths = *paths;
        if (multistart) cfg.calibration.multistart = *multistart;
        validate(cfg);
#ifdef _OPENMP
        if (threads > 0) omp_set_num_threads(threads);
#endif

        Pipeline p(std::move(cfg), out, err);
        for (const auto& [name, s] : subs) {
            if (!s->parsed()) continue;
            if (name == "bootstrap") return p.bootstrap_cmd();
            if (name == "calibrate") return p.calibrate_cmd();
            if (name == "simulate") return p.simulate_cmd();
            if (name == "price") return p.price_cmd();
            return p.report_cmd();
        }
        return kExitInput;
    } catch (const Error& e) {
        err << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const fs::filesystem_error& e) {
        err << "error (io): " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
}

}  // namespace cirdiff::app
