#include "mtd/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "mtd/error.hpp"
#include "mtd/io.hpp"

namespace mtd {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged:
      return "converged";
    case SolveStatus::kIterationLimit:
      return "iteration-limit";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kNumericalFailure:
      return "numerical-failure";
  }
  return "unknown";
}

double duality_gap_in_dose(const BlockLP& lp, const Vector& x, const Vector& y, const Vector& z,
                           const Vector& v) {
  double dual = lp.rhs.dot(y) + lp.lower.dot(z);
  for (Index j = 0; j < lp.num_cols(); ++j) {
    if (std::isfinite(lp.upper[j])) dual -= lp.upper[j] * v[j];
  }
  return lp.cost.dot(x) - dual;
}

namespace {

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

// Largest step in [0, inf) keeping value + step * delta >= 0 on the masked entries.
double max_step(const Vector& value, const Vector& delta, const std::vector<Index>* subset = nullptr) {
  double alpha = kInfinity;
  auto visit = [&](Index i) {
    if (delta[i] < 0.0) alpha = std::min(alpha, -value[i] / delta[i]);
  };
  if (subset) {
    for (Index i : *subset) visit(i);
  } else {
    for (Index i = 0; i < value.size(); ++i) visit(i);
  }
  return alpha;
}

struct Direction {
  Vector dx, dy, dz, dw, dv, ds;
};

class InteriorPoint {
 public:
  InteriorPoint(const BlockLP& lp, const SolverSettings& settings)
      : lp_(lp), settings_(settings), solver_(lp, settings.schur) {
    n_ = lp.num_cols();
    m_ = lp.num_rows();
    for (Index j = 0; j < n_; ++j) {
      if (std::isfinite(lp.upper[j])) bounded_.push_back(j);
    }
    upper_finite_ = Vector::Zero(n_);
    for (Index j : bounded_) upper_finite_[j] = lp.upper[j];
    norm_b_ = inf_norm(lp.rhs);
    norm_c_ = inf_norm(lp.cost);
    norm_u_ = inf_norm(upper_finite_);
    pairs_ = static_cast<double>(n_ + m_ + static_cast<Index>(bounded_.size()));
  }

  SolveResult run();

 private:
  void starting_point();
  void residuals();
  double complementarity() const;
  void assemble(double regularization);
  Direction newton(const Vector& r_xz, const Vector& r_wv, const Vector& r_sy, int iteration, bool corrector);
  void fill_result(SolveResult& result) const;

  const BlockLP& lp_;
  const SolverSettings& settings_;
  SchurSolver solver_;
  KKTSystem sys_;
  Index n_ = 0, m_ = 0;
  std::vector<Index> bounded_;
  Vector upper_finite_;
  double norm_b_ = 0.0, norm_c_ = 0.0, norm_u_ = 0.0, pairs_ = 1.0;

  // xl = x - lower; w = upper - x on bounded columns (one elsewhere, unused); s = A x - b.
  Vector xl_, w_, s_, y_, z_, v_;
  Vector r_p_, r_u_, r_d_;
};

void InteriorPoint::residuals() {
  const Vector x = lp_.lower + xl_;
  r_p_ = lp_.rhs - multiply(lp_, x) + s_;
  r_u_ = Vector::Zero(n_);
  for (Index j : bounded_) r_u_[j] = lp_.upper[j] - x[j] - w_[j];
  r_d_ = lp_.cost - multiply_transpose(lp_, y_) - z_ + v_;
}

double InteriorPoint::complementarity() const {
  double total = xl_.dot(z_) + s_.dot(y_);
  for (Index j : bounded_) total += w_[j] * v_[j];
  return total;
}

void InteriorPoint::assemble(double regularization) {
  Vector dx = z_.cwiseQuotient(xl_);
  for (Index j : bounded_) dx[j] += v_[j] / w_[j];
  const Vector dy = s_.cwiseQuotient(y_);
  sys_.lp = &lp_;
  sys_.d1 = dx.head(lp_.n1).array() + regularization;
  sys_.d2 = dx.tail(lp_.n2).array() + regularization;
  sys_.d3 = dy.head(lp_.m1).array() + regularization;
  sys_.d4 = dy.tail(lp_.m2()).array() + regularization;
  solver_.factorize(sys_);
}

Direction InteriorPoint::newton(const Vector& r_xz, const Vector& r_wv, const Vector& r_sy, int iteration,
                                bool corrector) {
  Vector rho_d = r_d_ - r_xz.cwiseQuotient(xl_);
  for (Index j : bounded_) rho_d[j] += (r_wv[j] - v_[j] * r_u_[j]) / w_[j];
  const Vector rho_p = r_p_ + r_sy.cwiseQuotient(y_);
  Vector rhs(n_ + m_);
  rhs << rho_d, rho_p;
  const Vector step = solver_.solve(rhs);
  if (settings_.observer) {
    NewtonSnapshot snap{iteration, corrector, &sys_, &rhs, &step};
    settings_.observer(snap);
  }
  Direction d;
  d.dx = step.head(n_);
  d.dy = step.tail(m_);
  d.dz = (r_xz - z_.cwiseProduct(d.dx)).cwiseQuotient(xl_);
  d.dw = Vector::Zero(n_);
  d.dv = Vector::Zero(n_);
  for (Index j : bounded_) {
    d.dw[j] = r_u_[j] - d.dx[j];
    d.dv[j] = (r_wv[j] - v_[j] * d.dw[j]) / w_[j];
  }
  d.ds = (r_sy - s_.cwiseProduct(d.dy)).cwiseQuotient(y_);
  return d;
}

void InteriorPoint::starting_point() {
  // Regularized least-squares solves with unit diagonals.
  sys_.lp = &lp_;
  sys_.d1 = Vector::Ones(lp_.n1);
  sys_.d2 = Vector::Ones(lp_.n2);
  sys_.d3 = Vector::Ones(lp_.m1);
  sys_.d4 = Vector::Ones(lp_.m2());
  solver_.factorize(sys_);

  Vector rhs = Vector::Zero(n_ + m_);
  rhs.tail(m_) = lp_.rhs - multiply(lp_, lp_.lower);
  Vector sol = solver_.solve(rhs);
  xl_ = sol.head(n_);

  rhs.setZero();
  rhs.head(n_) = lp_.cost;
  sol = solver_.solve(rhs);
  y_ = sol.tail(m_);
  const Vector reduced = lp_.cost - multiply_transpose(lp_, y_);

  const Vector x = lp_.lower + xl_;
  s_ = multiply(lp_, x) - lp_.rhs;
  w_ = Vector::Ones(n_);
  z_ = reduced;
  v_ = Vector::Zero(n_);
  for (Index j : bounded_) {
    w_[j] = lp_.upper[j] - x[j];
    z_[j] = std::max(reduced[j], 0.0);
    v_[j] = std::max(-reduced[j], 0.0);
  }

  auto primal_min = [&] {
    double lo = std::min(xl_.size() ? xl_.minCoeff() : kInfinity, s_.size() ? s_.minCoeff() : kInfinity);
    for (Index j : bounded_) lo = std::min(lo, w_[j]);
    return lo;
  };
  auto dual_min = [&] {
    double lo = std::min(z_.size() ? z_.minCoeff() : kInfinity, y_.size() ? y_.minCoeff() : kInfinity);
    for (Index j : bounded_) lo = std::min(lo, v_[j]);
    return lo;
  };
  auto shift_primal = [&](double d) {
    xl_.array() += d;
    s_.array() += d;
    for (Index j : bounded_) w_[j] += d;
  };
  auto shift_dual = [&](double d) {
    z_.array() += d;
    y_.array() += d;
    for (Index j : bounded_) v_[j] += d;
  };
  shift_primal(std::max(-1.5 * primal_min(), 0.0));
  shift_dual(std::max(-1.5 * dual_min(), 0.0));

  double primal_sum = xl_.sum() + s_.sum();
  double dual_sum = z_.sum() + y_.sum();
  for (Index j : bounded_) {
    primal_sum += w_[j];
    dual_sum += v_[j];
  }
  const double product = complementarity();
  if (product > 0.0 && primal_sum > 0.0 && dual_sum > 0.0) {
    shift_primal(0.5 * product / dual_sum);
    shift_dual(0.5 * product / primal_sum);
  }
  // Degenerate data (e.g. all-zero cost and right-hand side) can leave zeros behind.
  const double floor = 1e-2 * (1.0 + std::max(norm_b_, norm_c_));
  for (Index j = 0; j < n_; ++j) {
    xl_[j] = std::max(xl_[j], floor);
    z_[j] = std::max(z_[j], floor);
  }
  for (Index i = 0; i < m_; ++i) {
    s_[i] = std::max(s_[i], floor);
    y_[i] = std::max(y_[i], floor);
  }
  for (Index j : bounded_) {
    w_[j] = std::max(w_[j], floor);
    v_[j] = std::max(v_[j], floor);
  }
}

void InteriorPoint::fill_result(SolveResult& result) const {
  result.x = lp_.lower + xl_;
  result.y = y_;
  result.z = z_;
  result.v = Vector::Zero(n_);
  for (Index j : bounded_) result.v[j] = v_[j];
  result.slack = multiply(lp_, result.x) - lp_.rhs;
  result.objective = lp_.cost.dot(result.x);
  result.gap = duality_gap_in_dose(lp_, result.x, y_, z_, result.v);
  result.dual_objective = result.objective - result.gap;
  result.schur_order = solver_.order();
  result.dense_schur = solver_.is_dense();
}

SolveResult InteriorPoint::run() {
  SolveResult result;
  try {
    starting_point();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kSolver) throw;
    result.status = SolveStatus::kNumericalFailure;
    result.message = e.what();
    return result;
  }

  int stalled = 0;
  for (int iter = 0;; ++iter) {
    residuals();
    const double mu = complementarity() / pairs_;
    const Vector x = lp_.lower + xl_;
    Vector v_full = Vector::Zero(n_);
    for (Index j : bounded_) v_full[j] = v_[j];
    const double pobj = lp_.cost.dot(x);
    const double gap = duality_gap_in_dose(lp_, x, y_, z_, v_full);
    const double rel_p = std::max(inf_norm(r_p_) / (1.0 + norm_b_), inf_norm(r_u_) / (1.0 + norm_u_));
    const double rel_d = inf_norm(r_d_) / (1.0 + norm_c_);

    IterationLog entry;
    entry.iteration = iter;
    entry.primal_residual = rel_p;
    entry.dual_residual = rel_d;
    entry.primal_objective = pobj;
    entry.dual_objective = pobj - gap;
    entry.gap = gap;
    entry.mu = mu;
    double min_pair = std::min(xl_.minCoeff(), z_.minCoeff());
    if (m_ > 0) min_pair = std::min({min_pair, s_.minCoeff(), y_.minCoeff()});
    for (Index j : bounded_) min_pair = std::min({min_pair, w_[j], v_[j]});
    entry.min_pair = min_pair;

    if (!std::isfinite(mu) || !std::isfinite(gap) || !std::isfinite(rel_p) || !std::isfinite(rel_d)) {
      result.status = SolveStatus::kNumericalFailure;
      result.message = "non-finite iterate";
      result.log.push_back(entry);
      break;
    }
    if (rel_p <= settings_.feasibility_tolerance && rel_d <= settings_.feasibility_tolerance &&
        std::abs(gap) <= settings_.dose_tolerance) {
      result.status = SolveStatus::kConverged;
      result.log.push_back(entry);
      break;
    }
    // Farkas-type certificate: a diverging, normalized dual ray with positive objective.
    const double dual_scale = std::max({inf_norm(y_), inf_norm(z_), inf_norm(v_full)});
    if (dual_scale > 1e10 * (1.0 + norm_c_) && rel_p > settings_.feasibility_tolerance) {
      const double ray_residual = inf_norm(multiply_transpose(lp_, y_) + z_ - v_full) / dual_scale;
      const double ray_objective = (pobj - gap) / dual_scale;
      if (ray_residual < 1e-6 && ray_objective > 0.0) {
        result.status = SolveStatus::kInfeasible;
        result.message = "dual ray certifies primal infeasibility";
        result.log.push_back(entry);
        break;
      }
    }
    if (iter >= settings_.max_iterations) {
      result.status = SolveStatus::kIterationLimit;
      result.message = "iteration limit reached";
      result.log.push_back(entry);
      break;
    }

    try {
      assemble(settings_.regularization);
      entry.fallback = solver_.used_fallback();

      Vector r_wv = Vector::Zero(n_);
      for (Index j : bounded_) r_wv[j] = -w_[j] * v_[j];
      const Direction aff = newton(-xl_.cwiseProduct(z_), r_wv, -s_.cwiseProduct(y_), iter, false);

      const double ap = std::min(1.0, std::min({max_step(xl_, aff.dx), max_step(s_, aff.ds),
                                                max_step(w_, aff.dw, &bounded_)}));
      const double ad = std::min(1.0, std::min({max_step(z_, aff.dz), max_step(y_, aff.dy),
                                                max_step(v_, aff.dv, &bounded_)}));
      double mu_aff = (xl_ + ap * aff.dx).dot(z_ + ad * aff.dz) + (s_ + ap * aff.ds).dot(y_ + ad * aff.dy);
      for (Index j : bounded_) mu_aff += (w_[j] + ap * aff.dw[j]) * (v_[j] + ad * aff.dv[j]);
      mu_aff /= pairs_;
      const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, settings_.centering_exponent), 0.0, 1.0);
      entry.sigma = sigma;

      const double target = sigma * mu;
      Vector r_xz = (-xl_.cwiseProduct(z_) - aff.dx.cwiseProduct(aff.dz)).array() + target;
      Vector r_sy = (-s_.cwiseProduct(y_) - aff.ds.cwiseProduct(aff.dy)).array() + target;
      for (Index j : bounded_) r_wv[j] = target - w_[j] * v_[j] - aff.dw[j] * aff.dv[j];
      const Direction d = newton(r_xz, r_wv, r_sy, iter, true);

      const double eta = settings_.step_fraction;
      const double step_p = std::min(1.0, eta * std::min({max_step(xl_, d.dx), max_step(s_, d.ds),
                                                           max_step(w_, d.dw, &bounded_)}));
      const double step_d = std::min(1.0, eta * std::min({max_step(z_, d.dz), max_step(y_, d.dy),
                                                           max_step(v_, d.dv, &bounded_)}));
      entry.primal_step = step_p;
      entry.dual_step = step_d;
      if (!d.dx.allFinite() || !d.dy.allFinite()) {
        result.status = SolveStatus::kNumericalFailure;
        result.message = "non-finite Newton direction";
        result.log.push_back(entry);
        break;
      }
      xl_ += step_p * d.dx;
      s_ += step_p * d.ds;
      z_ += step_d * d.dz;
      y_ += step_d * d.dy;
      for (Index j : bounded_) {
        w_[j] += step_p * d.dw[j];
        v_[j] += step_d * d.dv[j];
      }
      stalled = (step_p < 1e-10 && step_d < 1e-10) ? stalled + 1 : 0;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kSolver) throw;
      result.status = SolveStatus::kNumericalFailure;
      result.message = e.what();
      result.log.push_back(entry);
      break;
    }
    result.log.push_back(entry);
    if (stalled >= 5) {
      result.status = SolveStatus::kNumericalFailure;
      result.message = "step lengths collapsed";
      break;
    }
  }
  result.iterations = static_cast<int>(result.log.size()) - 1;
  fill_result(result);
  return result;
}

}  // namespace

SolveResult solve(const BlockLP& lp, const SolverSettings& settings) {
  if (!(settings.dose_tolerance > 0.0)) throw_config("dose tolerance must be positive");
  if (!(settings.feasibility_tolerance > 0.0)) throw_config("feasibility tolerance must be positive");
  if (!(settings.step_fraction > 0.0 && settings.step_fraction < 1.0)) {
    throw_config("step fraction must lie in (0,1)");
  }
  if (settings.max_iterations < 1) throw_config("max_iterations must be positive");
  partition_report(lp);
  InteriorPoint ipm(lp, settings);
  return ipm.run();
}

void write_iteration_log(const std::vector<IterationLog>& log, std::ostream& out) {
  CsvWriter csv(out);
  csv.field("iter").field("primal_residual").field("dual_residual").field("primal_objective")
      .field("dual_objective").field("gap_gy").field("mu").field("sigma").field("primal_step")
      .field("dual_step").field("min_pair").field("fallback");
  csv.end_row();
  for (const IterationLog& e : log) {
    csv.field(e.iteration).field(e.primal_residual).field(e.dual_residual).field(e.primal_objective)
        .field(e.dual_objective).field(e.gap).field(e.mu).field(e.sigma).field(e.primal_step)
        .field(e.dual_step).field(e.min_pair).field(e.fallback ? 1 : 0);
    csv.end_row();
  }
}

}  // namespace mtd
