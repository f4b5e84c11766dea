#include "cirdiff/calibration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "cirdiff/error.hpp"
#include "cirdiff/json_io.hpp"
#include "cirdiff/rng.hpp"

namespace cirdiff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

Vec8 to_vec(const PhiVector& p) { return Eigen::Map<const Vec8>(p.pi.data()); }

PhiVector from_vec(const Vec8& v) {
    PhiVector p;
    Eigen::Map<Vec8>(p.pi.data()) = v;
    return p;
}

// log A, B of one leg and their partial derivatives with respect to
// (phi1, phi2, phi3); B does not depend on phi3.
struct LegTerms {
    double log_a = 0.0;
    double b = 0.0;
    double dlog_a[3] = {0.0, 0.0, 0.0};
    double db[2] = {0.0, 0.0};
};

LegTerms leg_terms(double p1, double p2, double p3, double tau, bool derivs) {
    const double e = std::exp(-p1 * tau);
    const double om = -std::expm1(-p1 * tau);
    const double d = p2 * om + p1 * e;
    LegTerms t;
    t.b = om / d;
    const double log_core = std::log(p1) - std::log(d) + (p2 - p1) * tau;
    t.log_a = p3 * log_core;
    if (!derivs) return t;
    const double dd1 = e * (1.0 + (p2 - p1) * tau);
    const double dd2 = om;
    t.dlog_a[0] = p3 * (1.0 / p1 - dd1 / d - tau);
    t.dlog_a[1] = p3 * (tau - dd2 / d);
    t.dlog_a[2] = log_core;
    t.db[0] = (tau * e * d - om * dd1) / (d * d);
    t.db[1] = -om * om / (d * d);
    return t;
}

double log_price(const PhiVector& p, double tau) {
    const LegTerms x = leg_terms(p[0], p[1], p[2], tau, false);
    const LegTerms y = leg_terms(p[3], p[4], p[5], tau, false);
    return x.log_a - x.b * p.x0() + y.log_a + y.b * p.y0();
}

// Half-plane a . (phi1, phi2) >= c.
struct HalfPlane {
    double a1, a2, c;
};

std::array<HalfPlane, 4> leg_constraints(Leg leg, double eps) {
    if (leg == Leg::x) {
        return {{{1, 0, eps}, {0, 1, eps}, {1, -1, eps}, {-1, 2, eps}}};
    }
    return {{{1, 0, eps}, {0, 1, eps}, {-1, 1, eps}, {-1, 2, eps}}};
}

// Exact Euclidean projection onto a 2-D polygon given by half-planes: the
// minimiser is either the point itself, its projection onto one edge line or
// a vertex.
void project_leg(double& p1, double& p2, Leg leg, double eps) {
    const auto cons = leg_constraints(leg, eps);
    auto feasible = [&](double q1, double q2) {
        for (const auto& h : cons) {
            if (h.a1 * q1 + h.a2 * q2 < h.c - 1e-14) return false;
        }
        return true;
    };
    if (feasible(p1, p2)) return;

    double best1 = 0.0, best2 = 0.0, best_d = kInf;
    auto consider = [&](double q1, double q2) {
        if (!feasible(q1, q2)) return;
        const double d = (q1 - p1) * (q1 - p1) + (q2 - p2) * (q2 - p2);
        if (d < best_d) {
            best_d = d;
            best1 = q1;
            best2 = q2;
        }
    };
    for (const auto& h : cons) {
        const double n2 = h.a1 * h.a1 + h.a2 * h.a2;
        const double s = (h.c - h.a1 * p1 - h.a2 * p2) / n2;
        consider(p1 + s * h.a1, p2 + s * h.a2);
    }
    for (std::size_t i = 0; i < cons.size(); ++i) {
        for (std::size_t j = i + 1; j < cons.size(); ++j) {
            const double det = cons[i].a1 * cons[j].a2 - cons[i].a2 * cons[j].a1;
            if (std::abs(det) < 1e-15) continue;
            consider((cons[i].c * cons[j].a2 - cons[i].a2 * cons[j].c) / det,
                     (cons[i].a1 * cons[j].c - cons[i].c * cons[j].a1) / det);
        }
    }
    if (!std::isfinite(best_d)) fail(ErrorCode::infeasible_guess, "projection onto the admissible set failed");
    // Vertices and edge projections can land an ulp outside the bounds.
    p1 = std::max(best1, eps);
    p2 = std::max(best2, eps);
}

PhiVector project_box(const PhiVector& in, double eps) {
    PhiVector p = in;
    for (std::size_t i : {0, 1, 3, 4}) p[i] = std::max(p[i], eps);
    p[2] = std::max(p[2], 1.0);
    p[5] = std::max(p[5], 1.0);
    p[6] = std::max(p[6], 0.0);
    p[7] = std::max(p[7], 0.0);
    return p;
}

// -- Levenberg-Marquardt ------------------------------------------------------

// Residual callback: fills r, and J (row-major, r.size() x 8) when non-null.
// Returns false when the residuals are not finite.
using ResidualFn = std::function<bool(const PhiVector&, std::vector<double>&, std::vector<double>*)>;
using ProjectFn = std::function<PhiVector(const PhiVector&)>;

struct LmRun {
    PhiVector x;
    double f = kInf;
    int iterations = 0;
    bool converged = false;
};

double sum_sq(const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return s;
}

// Linear inequality g . p >= c on the full parameter vector.
struct LinearConstraint {
    Vec8 g;
    double c;
};

LinearConstraint on(std::initializer_list<std::pair<int, double>> terms, double c) {
    LinearConstraint lc{Vec8::Zero(), c};
    for (auto [i, a] : terms) lc.g[i] = a;
    return lc;
}

std::vector<LinearConstraint> bound_constraints(double eps) {
    return {on({{0, 1}}, eps), on({{1, 1}}, eps), on({{3, 1}}, eps), on({{4, 1}}, eps),
            on({{2, 1}}, 1.0), on({{5, 1}}, 1.0), on({{6, 1}}, 0.0), on({{7, 1}}, 0.0)};
}

std::vector<LinearConstraint> admissible_constraints(double eps) {
    auto out = bound_constraints(eps);
    for (const auto& [off, leg] : {std::pair{0, Leg::x}, std::pair{3, Leg::y}}) {
        for (const auto& h : leg_constraints(leg, eps)) {
            if (h.a1 != 0.0 && h.a2 != 0.0) out.push_back(on({{off, h.a1}, {off + 1, h.a2}}, h.c));
        }
    }
    return out;
}

// Step of the damped normal equations restricted to the null space of the
// working-set normals; the working set grows with every active constraint the
// step would cross, so steps slide along the boundary instead of being
// projected back onto it.
struct StepSolver {
    const Mat8& a;
    std::vector<Vec8> working;

    Eigen::MatrixXd basis() const {
        if (working.empty()) return Mat8::Identity();
        Eigen::Matrix<double, Eigen::Dynamic, 8> g(static_cast<Eigen::Index>(working.size()), 8);
        for (std::size_t i = 0; i < working.size(); ++i) g.row(static_cast<Eigen::Index>(i)) = working[i].transpose();
        Eigen::FullPivLU<Eigen::Matrix<double, Eigen::Dynamic, 8>> lu(g);
        return lu.kernel();
    }

    Vec8 solve(const Eigen::MatrixXd& z, const Vec8& rhs) const {
        if (z.cols() == 0 || (z.cols() == 1 && z.norm() == 0.0)) return Vec8::Zero();
        const Eigen::MatrixXd reduced = z.transpose() * a * z;
        const Eigen::VectorXd d = reduced.ldlt().solve(z.transpose() * rhs);
        return z * d;
    }
};

LmRun levenberg_marquardt(const PhiVector& start, const ResidualFn& residuals, const ProjectFn& project,
                          const std::vector<LinearConstraint>& constraints, const CalibrationOptions& o) {
    LmRun run;
    run.x = start;
    std::vector<double> r, jac, r_trial;
    if (!residuals(run.x, r, &jac)) return run;
    run.f = sum_sq(r);

    double lambda = 1e-3;
    for (;;) {
        const auto n = static_cast<Eigen::Index>(r.size());
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 8, Eigen::RowMajor>> J(jac.data(), n, 8);
        Eigen::Map<const Eigen::VectorXd> R(r.data(), n);
        const Vec8 jtr = J.transpose() * R;
        const Vec8 grad = 2.0 * jtr;
        const Vec8 x = to_vec(run.x);

        const double pg = (x - to_vec(project(from_vec(x - grad)))).norm();
        if (pg < o.gradient_tol || run.f <= 1e-30) {
            run.converged = true;
            break;
        }
        if (run.iterations >= o.max_iterations) break;
        ++run.iterations;

        const Mat8 h = J.transpose() * J;
        const double max_diag = h.diagonal().maxCoeff();
        Vec8 scale;
        for (int i = 0; i < 8; ++i) scale[i] = std::max(h(i, i), max_diag > 0.0 ? 1e-12 * max_diag : 1.0);

        const double step_floor = o.step_tol * (1.0 + x.norm());
        bool accepted = false;
        double step = 0.0;
        PhiVector trial;
        std::vector<std::size_t> active;
        for (std::size_t i = 0; i < constraints.size(); ++i) {
            if (constraints[i].g.dot(x) - constraints[i].c <= 1e-9) active.push_back(i);
        }
        while (lambda <= 1e16) {
            Mat8 a = h;
            a.diagonal() += lambda * scale;
            StepSolver solver{a, {}};
            Eigen::MatrixXd z = solver.basis();
            Vec8 s = solver.solve(z, -jtr);
            for (std::size_t round = 0; round < active.size(); ++round) {
                bool grew = false;
                for (std::size_t i : active) {
                    const Vec8& g = constraints[i].g;
                    if (g.dot(s) < -1e-14 * s.norm() &&
                        std::find_if(solver.working.begin(), solver.working.end(),
                                     [&](const Vec8& w) { return w == g; }) == solver.working.end()) {
                        solver.working.push_back(g);
                        grew = true;
                    }
                }
                if (!grew) break;
                z = solver.basis();
                s = solver.solve(z, -jtr);
            }
            if (!s.allFinite()) {
                lambda *= 4.0;
                continue;
            }
            // Geodesic acceleration: second-order correction along the
            // velocity s from a finite-difference directional derivative.
            constexpr double h_fd = 0.1;
            if (residuals(from_vec(x + h_fd * s), r_trial, nullptr)) {
                Eigen::Map<const Eigen::VectorXd> rv(r_trial.data(), n);
                const Eigen::VectorXd r2 = (2.0 / h_fd) * ((rv - R) / h_fd - J * s);
                const Vec8 acc = solver.solve(z, -(J.transpose() * r2));
                if (acc.allFinite() && 2.0 * acc.norm() <= 0.75 * s.norm()) s += 0.5 * acc;
            }
            trial = project(from_vec(x + s));
            step = (to_vec(trial) - x).norm();
            if (step < step_floor) break;
            if (residuals(trial, r_trial, nullptr)) {
                const double ft = sum_sq(r_trial);
                if (ft < run.f) {
                    accepted = true;
                    lambda = std::max(lambda / 3.0, 1e-15);
                    break;
                }
            }
            lambda *= 4.0;
        }
        if (!accepted) {
            // Projected-gradient backtracking as a last resort.
            lambda = std::min(lambda, 1e16);
            double alpha = 1.0 / std::max(1.0, grad.norm());
            for (int k = 0; k < 60 && !accepted; ++k, alpha *= 0.5) {
                trial = project(from_vec(x - alpha * grad));
                step = (to_vec(trial) - x).norm();
                if (step < step_floor) break;
                if (residuals(trial, r_trial, nullptr) && sum_sq(r_trial) < run.f) accepted = true;
            }
        }
        if (!accepted) {
            // No step longer than the step tolerance decreases f.
            run.converged = true;
            break;
        }
        run.x = trial;
        if (!residuals(run.x, r, &jac)) break;  // cannot happen: trial residuals were finite
        run.f = sum_sq(r);
        if (step < step_floor) {
            run.converged = true;
            break;
        }
    }
    return run;
}

struct SingleRun {
    PhiVector x;
    double f = kInf;
    int iterations = 0;
    bool converged = false;
    CalibrationMethod method = CalibrationMethod::projected_lm;
};

SingleRun run_projected_lm(const CalibrationTarget& t, const PhiVector& start, const CalibrationOptions& o) {
    ProjectFn proj = [](const PhiVector& p) { return project_admissible(p); };
    const auto cons = admissible_constraints(kPhiEps);

    // Warm-up on log(P^M / P): same zero set, first-order equal near a fit,
    // but symmetric in over/under-pricing so early steps do not get thrown
    // into the region where P is tiny and P^M / P - 1 explodes.
    ResidualFn log_res = [&t](const PhiVector& p, std::vector<double>& r, std::vector<double>* j) {
        if (j) {
            relative_residuals_jacobian(p, t, r, *j);
            for (std::size_t i = 0; i < r.size(); ++i) {
                for (std::size_t c = 0; c < 8; ++c) (*j)[i * 8 + c] /= 1.0 + r[i];
            }
        } else {
            r = relative_residuals(p, t);
        }
        for (double& v : r) v = std::log1p(v);
        return std::all_of(r.begin(), r.end(), [](double v) { return std::isfinite(v); });
    };
    const LmRun warm = levenberg_marquardt(start, log_res, proj, cons, o);
    const PhiVector x = objective(warm.x, t) < objective(start, t) ? warm.x : start;

    ResidualFn res = [&t](const PhiVector& p, std::vector<double>& r, std::vector<double>* j) {
        if (j) {
            relative_residuals_jacobian(p, t, r, *j);
        } else {
            r = relative_residuals(p, t);
        }
        return std::all_of(r.begin(), r.end(), [](double v) { return std::isfinite(v); });
    };
    const LmRun lm = levenberg_marquardt(x, res, proj, cons, o);
    return {lm.x, objective(lm.x, t), lm.iterations + warm.iterations, lm.converged,
            CalibrationMethod::projected_lm};
}

SingleRun run_penalty(const CalibrationTarget& t, const PhiVector& start, const CalibrationOptions& o) {
    // The leg inequalities move into the residual vector as sqrt(mu) * max(0,
    // violation); only the bounds are projected. The margin is 2 eps so the
    // final projection onto the strict interior is a small move.
    const double margin = 2.0 * kPhiEps;
    const std::array<std::pair<std::size_t, HalfPlane>, 4> rows{{
        {0, {1, -1, margin}},  // phi1x - phi2x >= 0
        {0, {-1, 2, margin}},  // 2 phi2x - phi1x >= 0
        {3, {-1, 1, margin}},  // phi2y - phi1y >= 0
        {3, {-1, 2, margin}},  // 2 phi2y - phi1y >= 0
    }};
    PhiVector x = project_box(start, kPhiEps);
    int iterations = 0;
    bool converged = false;
    for (double mu = 1e2; mu <= 1e10 * 1.0001; mu *= 100.0) {
        const double sqrt_mu = std::sqrt(mu);
        ResidualFn res = [&](const PhiVector& p, std::vector<double>& r, std::vector<double>* j) {
            if (j) {
                relative_residuals_jacobian(p, t, r, *j);
            } else {
                r = relative_residuals(p, t);
            }
            for (const auto& [off, h] : rows) {
                const double v = h.c - (h.a1 * p[off] + h.a2 * p[off + 1]);
                r.push_back(v > 0.0 ? sqrt_mu * v : 0.0);
                if (j) {
                    std::array<double, 8> row{};
                    if (v > 0.0) {
                        row[off] = -sqrt_mu * h.a1;
                        row[off + 1] = -sqrt_mu * h.a2;
                    }
                    j->insert(j->end(), row.begin(), row.end());
                }
            }
            return std::all_of(r.begin(), r.end(), [](double v) { return std::isfinite(v); });
        };
        ProjectFn proj = [](const PhiVector& p) { return project_box(p, kPhiEps); };
        const LmRun lm = levenberg_marquardt(x, res, proj, bound_constraints(kPhiEps), o);
        iterations += lm.iterations;
        converged = lm.converged;
        x = lm.x;
    }
    x = project_admissible(x);
    return {x, objective(x, t), iterations, converged, CalibrationMethod::penalty};
}

SingleRun run_single(const CalibrationTarget& t, const PhiVector& start, const CalibrationOptions& o) {
    const double f_start = objective(start, t);
    SingleRun best;
    if (o.method == CalibrationMethod::penalty) {
        best = run_penalty(t, start, o);
    } else {
        best = run_projected_lm(t, start, o);
        if (!best.converged && o.penalty_fallback) {
            SingleRun alt = run_penalty(t, start, o);
            alt.iterations += best.iterations;
            if (alt.f < best.f) {
                best = alt;
            } else {
                best.iterations = alt.iterations;
            }
        }
    }
    // Never return something worse than the (projected) starting point.
    if (!(best.f <= f_start)) {
        best.x = start;
        best.f = f_start;
    }
    return best;
}

}  // namespace

// -- PhiVector ----------------------------------------------------------------

DiffModel PhiVector::to_model() const {
    DiffModel m;
    m.x = model_from_phi(x_leg());
    m.y = model_from_phi(y_leg());
    m.x.z0 = x0();
    m.y.z0 = y0();
    return m;
}

PhiVector PhiVector::from_model(const DiffModel& m) {
    const PhiTriple tx = phi_from_model(m.x, Leg::x);
    const PhiTriple ty = phi_from_model(m.y, Leg::y);
    return PhiVector{{tx.phi1, tx.phi2, tx.phi3, ty.phi1, ty.phi2, ty.phi3, m.x.z0, m.y.z0}};
}

Admissibility is_admissible(const PhiVector& p) {
    Admissibility a;
    static const char* const names[8] = {"φ¹ₓ", "φ²ₓ", "φ³ₓ", "φ¹ᵧ", "φ²ᵧ", "φ³ᵧ", "x₀", "y₀"};
    for (std::size_t i = 0; i < 8; ++i) {
        if (!(p[i] >= 0.0)) a.violations.push_back(std::string("nonnegativity: ") + names[i] + " ≥ 0");
    }
    if (!(p[2] >= 1.0)) a.violations.push_back("Feller x");
    if (!(p[5] >= 1.0)) a.violations.push_back("Feller y");
    if (!(p[1] <= p[0])) a.violations.push_back("volatility x: φ²ₓ ≤ φ¹ₓ");
    if (!(p[3] <= p[4])) a.violations.push_back("volatility y: φ¹ᵧ ≤ φ²ᵧ");
    if (!(p[0] <= 2.0 * p[1])) a.violations.push_back("mean-reversion x: φ¹ₓ ≤ 2φ²ₓ");
    if (!(p[3] <= 2.0 * p[4])) a.violations.push_back("mean-reversion y: φ¹ᵧ ≤ 2φ²ᵧ");
    a.ok = a.violations.empty();
    return a;
}

PhiVector project_admissible(const PhiVector& in, double eps) {
    for (double v : in.pi) {
        if (!std::isfinite(v)) fail(ErrorCode::infeasible_guess, "initial guess has non-finite entries");
    }
    PhiVector p = in;
    project_leg(p[0], p[1], Leg::x, eps);
    project_leg(p[3], p[4], Leg::y, eps);
    p[2] = std::max(p[2], 1.0);
    p[5] = std::max(p[5], 1.0);
    p[6] = std::max(p[6], 0.0);
    p[7] = std::max(p[7], 0.0);
    return p;
}

// -- objective ----------------------------------------------------------------

CalibrationTarget CalibrationTarget::from_curve(const ZeroCurve& c, std::span<const double> maturities) {
    if (maturities.empty()) fail(ErrorCode::validation, "no calibration maturities");
    CalibrationTarget t;
    for (double T : maturities) {
        if (!(T > 0.0)) fail(ErrorCode::domain, "calibration maturities must be positive");
        t.maturities.push_back(T);
        t.market.push_back(c.discount(T));
    }
    return t;
}

CalibrationTarget CalibrationTarget::from_curve(const ZeroCurve& c) {
    const auto m = c.maturities();
    return from_curve(c, m);
}

std::vector<double> model_prices(const PhiVector& pi, std::span<const double> maturities) {
    std::vector<double> out;
    out.reserve(maturities.size());
    for (double T : maturities) out.push_back(std::exp(log_price(pi, T)));
    return out;
}

std::vector<double> relative_residuals(const PhiVector& pi, const CalibrationTarget& t) {
    std::vector<double> r(t.maturities.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] = t.market[i] * std::exp(-log_price(pi, t.maturities[i])) - 1.0;
    }
    return r;
}

void relative_residuals_jacobian(const PhiVector& p, const CalibrationTarget& t, std::vector<double>& r,
                                 std::vector<double>& jac) {
    const std::size_t n = t.maturities.size();
    r.assign(n, 0.0);
    jac.assign(n * 8, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double tau = t.maturities[i];
        const LegTerms x = leg_terms(p[0], p[1], p[2], tau, true);
        const LegTerms y = leg_terms(p[3], p[4], p[5], tau, true);
        const double lp = x.log_a - x.b * p.x0() + y.log_a + y.b * p.y0();
        r[i] = t.market[i] * std::exp(-lp) - 1.0;
        // d r / d theta = -(1 + r) d log P / d theta
        const double s = -(1.0 + r[i]);
        double* row = &jac[i * 8];
        row[0] = s * (x.dlog_a[0] - x.db[0] * p.x0());
        row[1] = s * (x.dlog_a[1] - x.db[1] * p.x0());
        row[2] = s * x.dlog_a[2];
        row[3] = s * (y.dlog_a[0] + y.db[0] * p.y0());
        row[4] = s * (y.dlog_a[1] + y.db[1] * p.y0());
        row[5] = s * y.dlog_a[2];
        row[6] = s * -x.b;
        row[7] = s * y.b;
    }
}

double objective(const PhiVector& pi, const CalibrationTarget& t) {
    if (!is_admissible(pi).ok) return kInf;
    const double f = sum_sq(relative_residuals(pi, t));
    return std::isfinite(f) ? f : kInf;
}

double objective(const PhiVector& pi, const ZeroCurve& c, std::span<const double> maturities) {
    return objective(pi, CalibrationTarget::from_curve(c, maturities));
}

double mre(const PhiVector& pi, const CalibrationTarget& t) {
    if (!is_admissible(pi).ok) return kInf;
    double s = 0.0;
    for (double v : relative_residuals(pi, t)) s += std::abs(v);
    s /= static_cast<double>(t.maturities.size());
    return std::isfinite(s) ? s : kInf;
}

double mre(const PhiVector& pi, const ZeroCurve& c, std::span<const double> maturities) {
    return mre(pi, CalibrationTarget::from_curve(c, maturities));
}

// -- calibrate ----------------------------------------------------------------

const char* to_string(CalibrationMethod m) noexcept {
    return m == CalibrationMethod::penalty ? "penalty" : "projected-lm";
}

std::vector<PhiVector> multistart_points(const PhiVector& guess, const CalibrationOptions& o) {
    std::vector<PhiVector> pts{project_admissible(guess)};
    for (std::size_t i = 0; i < o.multistart; ++i) {
        rng::Stream s(rng::substream_key(o.seed, i, 0x63616c));
        PhiVector p;
        for (std::size_t j : {0, 1, 3, 4}) p[j] = 0.05 + 1.45 * s.uniform();
        p[2] = 1.0 + 2.0 * s.uniform();
        p[5] = 1.0 + 2.0 * s.uniform();
        p[6] = 0.5 * s.uniform();
        p[7] = 0.5 * s.uniform();
        pts.push_back(project_admissible(p));
    }
    return pts;
}

CalibrationResult calibrate(const CalibrationTarget& target, const PhiVector& guess,
                            const CalibrationOptions& o) {
    const auto t0 = std::chrono::steady_clock::now();
    if (target.maturities.empty()) fail(ErrorCode::validation, "no calibration maturities");
    const std::vector<PhiVector> starts = multistart_points(guess, o);

    std::vector<SingleRun> runs(starts.size());
    const auto n = static_cast<std::ptrdiff_t>(starts.size());
#pragma omp parallel for schedule(dynamic) if (n > 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        runs[static_cast<std::size_t>(i)] = run_single(target, starts[static_cast<std::size_t>(i)], o);
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < runs.size(); ++i) {
        if (runs[i].f < runs[best].f) best = i;
    }
    const SingleRun& b = runs[best];
    if (!std::isfinite(b.f)) fail(ErrorCode::non_convergence, "calibration produced no finite objective");

    CalibrationResult res;
    res.pi_star = b.x;
    res.model = b.x.to_model();
    res.objective = b.f;
    res.mre = mre(b.x, target);
    res.iterations = 0;
    for (const auto& r : runs) res.iterations += r.iterations;
    res.converged = b.converged;
    res.method = b.method;
    res.guess_projected = !(starts.front() == guess);
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

CalibrationResult calibrate(const ZeroCurve& c, std::span<const double> maturities, const PhiVector& guess,
                            const CalibrationOptions& o) {
    return calibrate(CalibrationTarget::from_curve(c, maturities), guess, o);
}

nlohmann::ordered_json to_json(const CalibrationResult& r) {
    nlohmann::ordered_json j;
    j["pi_star"] = r.pi_star.pi;
    j["model"] = model_to_json(r.model);
    j["objective"] = r.objective;
    j["mre"] = r.mre;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["method"] = to_string(r.method);
    j["wall_time_s"] = r.wall_time;
    return j;
}

}  // namespace cirdiff
