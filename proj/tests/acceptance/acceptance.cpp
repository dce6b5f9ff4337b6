// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include "hand_models.hpp"
#include "invariants.hpp"
#include "qendy/approx.hpp"
#include "qendy/baselines.hpp"
#include "qendy/fit.hpp"
#include "qendy/quadmodel.hpp"
#include "qendy/reduction.hpp"
#include "qendy/systems.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace qendy;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) pass = false;
    if (!detail.str().empty()) detail << "; ";
    detail << what << (cond ? "" : " [violated]");
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out[i++] = d;
  return out;
}

double sup_error_on(const Matrix& states, const std::function<Vector(const Vector&)>& a,
                    const std::function<Vector(const Vector&)>& b) {
  double err = 0.0;
  for (Eigen::Index k = 0; k < states.rows(); ++k) {
    const Vector x = states.row(k).transpose();
    err = std::max(err, (a(x) - b(x)).cwiseAbs().maxCoeff());
  }
  return err;
}

Matrix grid2(double lo, double hi, int n) {
  Matrix pts(n * n, 2);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      pts(i * n + j, 0) = lo + (hi - lo) * i / (n - 1);
      pts(i * n + j, 1) = lo + (hi - lo) * j / (n - 1);
    }
  }
  return pts;
}

TrainingSet pendulum_samples(std::size_t m, std::uint64_t seed) {
  return exact_derivatives(systems::pendulum(0.1), sample_uniform(symmetric_box(2, 1.0), m, seed));
}

// Sup distance between a model simulation and the RK4 reference; infinity if the model blows up.
double trajectory_error(const QuadraticModel& model, const VectorField& f, const Vector& x0, double t_end, double dt) {
  const Simulation sim = simulate_partial(model, x0, t_end, dt);
  if (sim.failed_step) return std::numeric_limits<double>::infinity();
  const Trajectory ref = rk4_integrate(f, x0, t_end, dt);
  return (sim.x.states - ref.states).cwiseAbs().maxCoeff();
}

Outcome pendulum_recovery() {
  Outcome o;
  const TrainingSet ts = pendulum_samples(100, 0);
  const QuadraticModel m = fit(systems::pendulum_dictionary(), ts);
  const VectorField f = systems::pendulum(0.1);
  const double err = sup_error_on(grid2(-1.0, 1.0, 20), [&](const Vector& x) { return m.extract_rhs(x); }, f);
  o.require(err < 1e-6, "grid sup error " + fmt(err) + " < 1e-6");
  const DataMatrices dm = build_data_matrices(m.dictionary(), ts);
  const double l = loss(m, dm).residual;
  const double bound = 1e-12 * dm.zdot.squaredNorm();
  o.require(l < bound, "loss " + fmt(l) + " < " + fmt(bound));
  return o;
}

Outcome small_sample_pendulum() {
  Outcome o;
  const VectorField f = systems::pendulum(0.1);
  for (std::size_t m : {6, 8, 10}) {
    const QuadraticModel model = fit(systems::pendulum_dictionary(), pendulum_samples(m, 0));
    const double err = trajectory_error(model, f, vec({1.0, 0.0}), 10.0, 1e-2);
    if (m == 6) {
      o.require(err < 0.5, "m=6 sup error " + fmt(err) + " < 0.5");
    } else if (m == 10) {
      o.require(err < 0.2, "m=10 sup error " + fmt(err) + " < 0.2");
    } else {
      o.require(std::isfinite(err), "m=8 sup error " + fmt(err));
    }
  }
  return o;
}

Outcome convergence_slope() {
  Outcome o;
  ConvergenceOptions opts;
  opts.m_list = {100, 1000, 10000, 100000};
  opts.runs = 100;
  opts.seed = 0;
  const ConvergenceResult r =
      convergence_study(systems::pendulum_dictionary(), systems::pendulum(0.1), symmetric_box(2, 1.0), opts);
  const double sr = r.slope_r.value_or(0.0);
  const double ss = r.slope_s.value_or(0.0);
  o.require(sr >= -0.65 && sr <= -0.35, "slope R " + fmt(sr) + " in [-0.65, -0.35]");
  o.require(ss >= -0.65 && ss <= -0.35, "slope s " + fmt(ss) + " in [-0.65, -0.35]");
  return o;
}

Outcome rational_system() {
  Outcome o;
  const VectorField f = systems::rational();
  const Trajectory tr = sample_trajectory(f, vec({1.0}), 5.0, 11);
  FitOptions opts;
  opts.force_c_zero = true;
  const QuadraticModel m = fit(systems::rational_dictionary(), exact_derivatives(f, tr.states), opts);
  const Matrix grid = Vector::LinSpaced(50, 0.05, 1.0);
  const double err = sup_error_on(grid, [&](const Vector& x) { return m.extract_rhs(x); }, f);
  o.require(err < 1e-3, "grid sup error " + fmt(err) + " < 1e-3");
  const QuadraticModel hand = testing::rational_embedding();
  const double hand_err = sup_error_on(grid, [&](const Vector& x) { return hand.extract_rhs(x); }, f);
  o.require(hand_err < 1e-10, "hand embedding error " + fmt(hand_err) + " < 1e-10");
  return o;
}

TrainingSet thomas_training(double alpha, double beta) {
  const VectorField f = systems::thomas(alpha, beta);
  return exact_derivatives(f, sample_trajectory(f, vec({1.0, -1.0, 0.0}), 100.0, 1000).states);
}

Outcome thomas_case_a() {
  Outcome o;
  const VectorField f = systems::thomas(0.2, 0.0);
  const TrainingSet ts = thomas_training(0.2, 0.0);
  const QuadraticModel m = fit(systems::thomas9_dictionary(), ts);
  const SparsityReport sr = sparsity_report(m);
  o.require(sr.max_abs_c < 1e-6, "max|C| " + fmt(sr.max_abs_c) + " < 1e-6");
  const double err = sup_error_on(ts.states, [&](const Vector& x) { return m.extract_rhs(x); }, f);
  o.require(err < 1e-4, "training sup error " + fmt(err) + " < 1e-4");
  const double traj = trajectory_error(m, f, vec({0.0, 1.0, 1.0}), 10.0, 1e-3);
  o.require(traj < 1e-2, "trajectory sup error " + fmt(traj) + " < 1e-2");
  const SindyModel s = sindy_fit(systems::thomas9_dictionary(), ts);
  const double serr = sup_error_on(ts.states, [&](const Vector& x) { return sindy_rhs(s, x); }, f);
  o.require(serr < 1e-4, "SINDy sup error " + fmt(serr) + " < 1e-4");
  return o;
}

Outcome thomas_case_b() {
  Outcome o;
  const VectorField f = systems::thomas(0.25, 0.15);
  const TrainingSet ts = thomas_training(0.25, 0.15);
  const QuadraticModel m9 = fit(systems::thomas9_dictionary(), ts);
  const double err9 = sup_error_on(ts.states, [&](const Vector& x) { return m9.extract_rhs(x); }, f);
  o.require(err9 < 1e-3, "9-dim combined map error " + fmt(err9) + " < 1e-3");
  const SparsityReport sa = sparsity_report(fit(systems::thomas9_dictionary(), thomas_training(0.2, 0.0)));
  const SparsityReport sb = sparsity_report(m9);
  const std::size_t na = sa.a_nonzeros + sa.b_nonzeros;
  const std::size_t nb = sb.a_nonzeros + sb.b_nonzeros;
  o.require(nb > 3 * na, "nonzeros " + std::to_string(nb) + " > 3 x " + std::to_string(na));
  std::size_t rows_dense = 0;
  for (std::size_t r = 3; r < 9; ++r) rows_dense += (sb.a_row_nonzeros[r] > sa.a_row_nonzeros[r]) ? 1 : 0;
  o.require(rows_dense == 6, "rows 4-9 denser than case a: " + std::to_string(rows_dense) + "/6");

  const QuadraticModel m15 = fit(systems::thomas15_dictionary(), ts);
  const double err15 = sup_error_on(ts.states, [&](const Vector& x) { return m15.extract_rhs(x); }, f);
  o.require(err15 < 1e-5, "15-dim extracted error " + fmt(err15) + " < 1e-5");
  const SparsityReport s15 = sparsity_report(m15);
  const double fill = static_cast<double>(s15.a_nonzeros + s15.b_nonzeros) /
                      static_cast<double>(m15.a().size() + m15.b().size());
  // Sparse relative to the dense 9-dim fit of the same data.
  const double fill9 = static_cast<double>(nb) / static_cast<double>(m9.a().size() + m9.b().size());
  o.require(fill < 0.1 * fill9, "15-dim A,B fill " + fmt(fill) + " < 0.1 x 9-dim fill " + fmt(fill9) + " (A " +
                                    std::to_string(s15.a_nonzeros) + ", B " + std::to_string(s15.b_nonzeros) + ")");
  return o;
}

Outcome reduced_pipeline() {
  Outcome o;
  SyntheticLiftOptions s;
  const SyntheticLift data = synthetic_limit_cycle(s);
  PipelineOptions opts;
  opts.dt = s.dt;
  const PipelineResult r = reduced_identification_pipeline(data.data, opts);
  o.require(r.test_relative_rms < 0.1, "held-out relative RMS " + fmt(r.test_relative_rms) + " < 0.1");
  const double gap = r.basis.spectrum[2] / r.basis.spectrum[3];
  o.require(gap > 10.0, "sigma3/sigma4 " + fmt(gap) + " > 10");
  return o;
}

Outcome baseline_identities() {
  Outcome o;
  const SindyModel s = sindy_fit(systems::pendulum_dictionary(), pendulum_samples(100, 0));
  Matrix xi(2, 4);
  xi << 0, 1, 0, 0, 0, -0.1, -1, 0;
  const double e_xi = (s.xi - xi).cwiseAbs().maxCoeff();
  o.require(e_xi < 1e-8, "SINDy Xi error " + fmt(e_xi) + " < 1e-8");

  const VectorField lift = systems::linear_lift();
  const GedmdModel g =
      gedmd_fit(systems::linear_lift_dictionary(), exact_derivatives(lift, sample_uniform(symmetric_box(2, 1.0), 50, 0)));
  Matrix theta(3, 3);
  theta << 1, 0, -1, 0, 2, 0, 0, 0, 8;
  const double e_theta = (g.theta - theta).cwiseAbs().maxCoeff();
  o.require(e_theta < 1e-8, "gEDMD generator error " + fmt(e_theta) + " < 1e-8");
  double e_ef = std::numeric_limits<double>::infinity();
  for (const auto& ef : koopman_eigenfunctions(g)) {
    if (std::abs(ef.eigenvalue - 1.0) < 1e-8) {
      e_ef = (ef.coefficients - vec({7.0, 0.0, 1.0}).normalized().cast<std::complex<double>>()).cwiseAbs().maxCoeff();
    }
  }
  o.require(e_ef < 1e-8, "eigenfunction at 1 vs [7,0,1] error " + fmt(e_ef) + " < 1e-8");
  return o;
}

Outcome structural_invariants() {
  Outcome o;
  testing::Rng rng(2024);
  auto add = [&o](const std::string& name, const testing::Tally& t, int expected) {
    o.require(t.ok(expected), name + " " + std::to_string(t.checked - t.failed) + "/" + std::to_string(t.checked) +
                                  " (worst " + fmt(t.worst) + ")");
  };
  add("gram cross-check", testing::check_gram_crosscheck(rng, 50), 50);
  add("stationarity", testing::check_stationarity(rng, 100), 100);
  add("null-space orthogonality", testing::check_null_space(rng, 100), 100);
  add("symmetrize invariance", testing::check_symmetrize(rng, 100), 100);
  add("lambda monotonicity", testing::check_regularization_monotone(rng, 50), 50);
  add("gradient vs finite differences", testing::check_gradient(rng, 30), 30);
  add("brute-force oracle", testing::check_brute_force(rng, 100), 100);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;  // 0 means no runtime requirement
  Outcome (*run)();
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "pendulum exact recovery", 5.0, pendulum_recovery},
      {2, "small-sample pendulum", 10.0, small_sample_pendulum},
      {3, "Gram convergence slope", 300.0, convergence_slope},
      {4, "rational system", 0.0, rational_system},
      {5, "Thomas test case a", 0.0, thomas_case_a},
      {6, "modified Thomas test case b", 0.0, thomas_case_b},
      {7, "reduced-order pipeline", 30.0, reduced_pipeline},
      {8, "baseline identities", 0.0, baseline_identities},
      {9, "structural invariants", 0.0, structural_invariants},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0.0) o.require(secs < c.budget_seconds, "runtime < " + fmt(c.budget_seconds) + " s");
    if (!o.pass) ++failures;
    std::printf("%s %d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
