#pragma once
//
// Calibration of Pi = [phi1x, phi2x, phi3x, phi1y, phi2y, phi3y, x0, y0] to a
// market discount curve:
//
//   min  sum_i (P^M(0,T_i) / P(Pi; 0,T_i) - 1)^2
//   s.t. Pi >= 0, phi3x >= 1, phi3y >= 1,
//        phi2x <= phi1x <= 2 phi2x,   phi1y <= phi2y,   phi1y <= 2 phi2y.
//
// The solver is a projected Levenberg-Marquardt on the residual vector with an
// analytic Jacobian. Iterates stay in the strict interior (margins of
// kPhiEps) so that the inverse map to (k, sigma, theta) stays regular.
// A quadratic-penalty variant with box projection only is kept as a fallback.
//

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cirdiff/core_model.hpp"
#include "cirdiff/marketdata.hpp"

namespace cirdiff {

struct PhiVector {
    std::array<double, 8> pi{};

    double& operator[](std::size_t i) { return pi[i]; }
    double operator[](std::size_t i) const { return pi[i]; }

    PhiTriple x_leg() const { return {pi[0], pi[1], pi[2], Leg::x}; }
    PhiTriple y_leg() const { return {pi[3], pi[4], pi[5], Leg::y}; }
    double x0() const { return pi[6]; }
    double y0() const { return pi[7]; }

    /// Throws invalid_phi when either triple cannot be inverted.
    DiffModel to_model() const;
    static PhiVector from_model(const DiffModel& m);

    friend bool operator==(const PhiVector&, const PhiVector&) = default;
};

inline constexpr PhiVector kDefaultGuess{{0.7, 0.65, 1.6, 0.47, 0.53, 1.5, 0.27, 0.28}};

struct Admissibility {
    bool ok = true;
    std::vector<std::string> violations;
};

/// Checks the constraints exactly as written (non-strict).
Admissibility is_admissible(const PhiVector& pi);

/// Euclidean projection onto the strict interior: phi >= eps, the leg
/// inequalities with margin eps, phi3 >= 1, x0, y0 >= 0. Throws
/// infeasible_guess on non-finite input.
PhiVector project_admissible(const PhiVector& pi, double eps = kPhiEps);

/// Market prices at the calibration maturities.
struct CalibrationTarget {
    std::vector<double> maturities;
    std::vector<double> market;

    static CalibrationTarget from_curve(const ZeroCurve& c, std::span<const double> maturities);
    /// All curve pillars.
    static CalibrationTarget from_curve(const ZeroCurve& c);
};

/// Model prices P(Pi; 0, T) for each maturity.
std::vector<double> model_prices(const PhiVector& pi, std::span<const double> maturities);

/// Relative residuals P^M / P - 1.
std::vector<double> relative_residuals(const PhiVector& pi, const CalibrationTarget& t);

/// Residuals and their Jacobian (row-major, n x 8).
void relative_residuals_jacobian(const PhiVector& pi, const CalibrationTarget& t,
                                 std::vector<double>& residuals, std::vector<double>& jacobian);

/// Sum of squared relative errors; +inf for an inadmissible Pi or when the
/// prices are not finite.
double objective(const PhiVector& pi, const CalibrationTarget& t);
double objective(const PhiVector& pi, const ZeroCurve& c, std::span<const double> maturities);

/// Mean absolute relative error; +inf like objective().
double mre(const PhiVector& pi, const CalibrationTarget& t);
double mre(const PhiVector& pi, const ZeroCurve& c, std::span<const double> maturities);

enum class CalibrationMethod { projected_lm, penalty };

const char* to_string(CalibrationMethod m) noexcept;

struct CalibrationOptions {
    CalibrationMethod method = CalibrationMethod::projected_lm;
    double gradient_tol = 1e-10;  // on the projected gradient of the objective
    double step_tol = 1e-12;
    int max_iterations = 500;
    /// Switch to the penalty method when the primary one does not converge.
    bool penalty_fallback = true;
    /// Additional random starts (0 = single run from the guess).
    std::size_t multistart = 0;
    std::uint64_t seed = 0;
};

struct CalibrationResult {
    PhiVector pi_star;
    DiffModel model;
    double objective = 0.0;
    double mre = 0.0;
    int iterations = 0;
    bool converged = false;
    double wall_time = 0.0;  // seconds
    bool guess_projected = false;
    CalibrationMethod method = CalibrationMethod::projected_lm;
};

CalibrationResult calibrate(const CalibrationTarget& target, const PhiVector& guess,
                            const CalibrationOptions& options = {});
CalibrationResult calibrate(const ZeroCurve& c, std::span<const double> maturities,
                            const PhiVector& guess, const CalibrationOptions& options = {});

/// Starting points of the multi-start search: the guess first, then
/// `options.multistart` uniform draws from a box, each projected.
std::vector<PhiVector> multistart_points(const PhiVector& guess, const CalibrationOptions& options);

/// {pi_star, model, objective, mre, iterations, converged, wall_time_s}
nlohmann::ordered_json to_json(const CalibrationResult& r);

}  // namespace cirdiff
