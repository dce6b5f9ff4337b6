#include "qendy/approx.hpp"

#include "qendy/error.hpp"
#include "qendy/linalg.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>
#include <string>
#include <thread>

namespace qendy {

QuadratureRule gauss_legendre(std::size_t order) {
  if (order == 0) throw InputError("quadrature order must be >= 1");
  const auto n = static_cast<Eigen::Index>(order);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (Eigen::Index i = 0; i < (n + 1) / 2; ++i) {
    // Newton on P_n starting from the Tricomi approximation of the i-th root.
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (Eigen::Index k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * static_cast<double>(k) - 1.0) * x * p1 - (static_cast<double>(k) - 1.0) * p0) /
                          static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    if (n == 1) {
      x = 0.0;
      dp = 1.0;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

InnerProductSpace InnerProductSpace::discrete(Matrix points, Vector weights) {
  if (points.rows() != weights.size()) throw InputError("one weight per point is required");
  if (points.rows() == 0) throw InputError("discrete inner product needs at least one point");
  if (!(weights.array() > 0.0).all()) throw InputError("inner-product weights must be positive");
  return InnerProductSpace(std::move(points), std::move(weights), false);
}

InnerProductSpace InnerProductSpace::continuous(const Box& box, std::size_t order, bool normalized) {
  if (box.empty()) throw InputError("box must have at least one axis");
  for (const Interval& iv : box) {
    if (!(iv.lo < iv.hi)) throw InputError("box needs lo < hi on every axis");
  }
  const QuadratureRule rule = gauss_legendre(order);
  const auto dim = static_cast<Eigen::Index>(box.size());
  const auto q = static_cast<Eigen::Index>(order);
  Eigen::Index total = 1;
  for (Eigen::Index a = 0; a < dim; ++a) total *= q;
  Matrix pts(total, dim);
  Vector w(total);
  double volume = 1.0;
  for (const Interval& iv : box) volume *= iv.hi - iv.lo;
  for (Eigen::Index flat = 0; flat < total; ++flat) {
    Eigen::Index rest = flat;
    double weight = 1.0;
    // Last axis varies fastest.
    for (Eigen::Index a = dim - 1; a >= 0; --a) {
      const Eigen::Index k = rest % q;
      rest /= q;
      const Interval& iv = box[static_cast<std::size_t>(a)];
      const double half = 0.5 * (iv.hi - iv.lo);
      pts(flat, a) = iv.lo + half * (rule.nodes[k] + 1.0);
      weight *= half * rule.weights[k];
    }
    w[flat] = normalized ? weight / volume : weight;
  }
  return InnerProductSpace(std::move(pts), std::move(w), true);
}

double InnerProductSpace::inner(const Vector& f_values, const Vector& g_values) const {
  if (f_values.size() != weights_.size() || g_values.size() != weights_.size()) {
    throw InputError("function samples do not match the inner-product points");
  }
  return (f_values.array() * g_values.array() * weights_.array()).sum();
}

BestApproxProblem BestApproxProblem::from_exprs(const std::vector<Expr>& basis, const Expr& target) {
  BestApproxProblem p;
  for (const Expr& e : basis) p.basis.push_back([e](const Vector& x) { return e.eval(x); });
  p.target = [target](const Vector& x) { return target.eval(x); };
  return p;
}

namespace {

Matrix sample_basis(const std::vector<ScalarFunction>& basis, const Matrix& points) {
  Matrix values(static_cast<Eigen::Index>(basis.size()), points.rows());
  for (Eigen::Index k = 0; k < points.rows(); ++k) {
    const Vector x = points.row(k).transpose();
    for (std::size_t i = 0; i < basis.size(); ++i) values(static_cast<Eigen::Index>(i), k) = basis[i](x);
  }
  return values;
}

Vector sample_target(const ScalarFunction& f, const Matrix& points) {
  Vector values(points.rows());
  for (Eigen::Index k = 0; k < points.rows(); ++k) values[k] = f(points.row(k).transpose());
  return values;
}

}  // namespace

GramPair gram_sampled(const Matrix& basis_values, const Vector& target_values, const Vector& weights) {
  if (basis_values.cols() != target_values.size() || weights.size() != target_values.size()) {
    throw InputError("sampled basis, target and weights differ in length");
  }
  GramPair g;
  const Matrix weighted = basis_values * weights.asDiagonal();
  g.a = weighted * basis_values.transpose();
  g.b = weighted * target_values;
  return g;
}

GramPair gram(const BestApproxProblem& problem, const InnerProductSpace& space) {
  if (problem.basis.empty()) throw InputError("best approximation needs at least one basis function");
  if (!problem.target) throw InputError("best approximation needs a target function");
  return gram_sampled(sample_basis(problem.basis, space.points()), sample_target(problem.target, space.points()),
                      space.weights());
}

Vector solve_min_norm(const Matrix& a, const Vector& b, std::optional<double> pinv_cutoff) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw InputError("Gram matrix and right-hand side mismatch");
  return SymmetricPseudoInverse(a, pinv_cutoff).solve(b);
}

double approximation_error(const BestApproxProblem& problem, const InnerProductSpace& space, const Vector& alpha) {
  if (static_cast<std::size_t>(alpha.size()) != problem.basis.size()) {
    throw InputError("coefficient vector does not match the basis");
  }
  const Matrix values = sample_basis(problem.basis, space.points());
  const Vector residual = sample_target(problem.target, space.points()) - values.transpose() * alpha;
  return space.inner(residual, residual);
}

GramSystem weighted_gram(const DataMatrices& dm, const Vector& weights) {
  if (static_cast<std::size_t>(weights.size()) != dm.samples()) throw InputError("one weight per sample is required");
  if (!(weights.array() > 0.0).all()) throw InputError("weights must be positive");
  const auto n = static_cast<Eigen::Index>(dm.embedding_dim());
  const Eigen::Index n2 = n * n;
  Matrix phi_bar(n2 + n + 1, dm.z1.cols());
  phi_bar.topRows(n2) = dm.z2;
  phi_bar.middleRows(n2, n) = dm.z1;
  phi_bar.bottomRows(1).setOnes();
  const Matrix weighted = phi_bar * weights.asDiagonal();
  GramSystem gs;
  gs.r = weighted * phi_bar.transpose();
  gs.s = weighted * dm.zdot.transpose();
  gs.samples = dm.samples();
  gs.embedding_dim = dm.embedding_dim();
  const Vector root = weights.cwiseSqrt();
  gs.factor = std::make_shared<const LeastSquaresFactor>(
      LeastSquaresFactor{root.asDiagonal() * phi_bar.transpose(), root.asDiagonal() * dm.zdot.transpose()});
  return gs;
}

GramSystem limit_gram(const Dictionary& d, const VectorField& f, const InnerProductSpace& space) {
  if (space.dim() != d.state_dim() || f.dim != d.state_dim()) {
    throw InputError("inner-product space, vector field and dictionary differ in state dimension");
  }
  const TrainingSet ts = exact_derivatives(f, space.points());
  GramSystem gs = weighted_gram(build_data_matrices(d, ts), space.weights());
  gs.samples = 0;
  return gs;
}

std::size_t thread_limit() {
  if (const char* env = std::getenv("QENDY_NUM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::uint64_t derive_seed(std::uint64_t base, std::size_t m, std::size_t run) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(m >> 32),
                    static_cast<std::uint32_t>(run)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InputError("slope needs equally many x and y values");
  if (x.size() < 2) return std::nullopt;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InputError("log-log slope needs positive values");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double k = static_cast<double>(x.size());
  const double denom = k * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  return (k * sxy - sx * sy) / denom;
}

ConvergenceResult convergence_study(const Dictionary& d, const VectorField& f, const Box& box,
                                    const ConvergenceOptions& opts) {
  if (opts.m_list.empty()) throw InputError("m_list must not be empty");
  if (opts.runs == 0) throw InputError("runs must be >= 1");
  for (std::size_t i = 0; i < opts.m_list.size(); ++i) {
    if (opts.m_list[i] == 0) throw InputError("sample sizes must be positive");
    if (i > 0 && opts.m_list[i] <= opts.m_list[i - 1]) throw InputError("m_list must be increasing");
  }
  if (box.size() != d.state_dim()) throw InputError("box dimension does not match the dictionary");

  const GramSystem limit = limit_gram(d, f, InnerProductSpace::continuous(box, opts.quadrature_order, true));
  const Eigen::Index n = limit.s.cols();
  const double r_scale = opts.relative ? limit.r.cwiseAbs().mean() : 1.0;
  Vector s_scale = Vector::Ones(n);
  if (opts.relative) {
    for (Eigen::Index l = 0; l < n; ++l) s_scale[l] = limit.s.col(l).cwiseAbs().mean();
  }

  const std::size_t jobs = opts.m_list.size() * opts.runs;
  std::vector<ConvergenceRow> rows(jobs);
  std::vector<std::string> failures(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t job = next++; job < jobs; job = next++) {
      const std::size_t m = opts.m_list[job / opts.runs];
      const std::size_t run = job % opts.runs;
      try {
        const Matrix x = sample_uniform(box, m, derive_seed(opts.seed, m, run));
        const GramSystem gs = assemble_gram(build_data_matrices(d, exact_derivatives(f, x)));
        const double inv_m = 1.0 / static_cast<double>(m);
        ConvergenceRow row;
        row.m = m;
        row.run = run;
        row.e_r = (gs.r * inv_m - limit.r).cwiseAbs().mean() / r_scale;
        row.e_s.resize(n);
        for (Eigen::Index l = 0; l < n; ++l) {
          row.e_s[l] = (gs.s.col(l) * inv_m - limit.s.col(l)).cwiseAbs().mean() / s_scale[l];
        }
        rows[job] = std::move(row);
      } catch (const std::exception& e) {
        failures[job] = e.what();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(opts.threads ? opts.threads : thread_limit(), jobs));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::string& msg : failures) {
    if (!msg.empty()) throw NumericError("convergence study run failed: " + msg);
  }

  ConvergenceResult result;
  result.rows = std::move(rows);
  std::vector<double> ms, er, es;
  for (std::size_t i = 0; i < opts.m_list.size(); ++i) {
    ConvergenceSummary s;
    s.m = opts.m_list[i];
    for (std::size_t run = 0; run < opts.runs; ++run) {
      const ConvergenceRow& row = result.rows[i * opts.runs + run];
      s.e_r_mean += row.e_r;
      s.e_s_mean += row.e_s.mean();
    }
    s.e_r_mean /= static_cast<double>(opts.runs);
    s.e_s_mean /= static_cast<double>(opts.runs);
    result.summary.push_back(s);
    ms.push_back(static_cast<double>(s.m));
    er.push_back(s.e_r_mean);
    es.push_back(s.e_s_mean);
  }
  result.slope_r = loglog_slope(ms, er);
  result.slope_s = loglog_slope(ms, es);
  return result;
}

}  // namespace qendy
