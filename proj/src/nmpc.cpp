#include "acmpc/nmpc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "acmpc/errors.hpp"

namespace acmpc {
namespace {

int move_index(int i, int Nu) { return std::min(i, Nu - 1); }

double state_component(const State &x, int j) { return j == 0 ? x.T_cab : x.T_evap; }

// Forward propagation of states, first and (for T_cab) second derivatives.
// T_evap is affine in U, so its second derivatives vanish.
struct Propagation {
  std::vector<State> x;
  std::vector<double> T_ain;
  Eigen::MatrixXd dx;                   // 2(Np+1) x n
  std::vector<Eigen::MatrixXd> d2_cab;  // Np+1 of n x n, only when requested
};

Propagation propagate(const OcpInstance &inst, const InputSequence &U,
                      bool second_order) {
  const auto &g = inst.model.gamma;
  const int Np = inst.horizon.Np;
  const int Nu = inst.horizon.Nu;
  const Eigen::Index n = 2 * Nu;

  Propagation P;
  P.x.resize(static_cast<std::size_t>(Np) + 1);
  P.T_ain.resize(static_cast<std::size_t>(Np) + 1);
  P.dx = Eigen::MatrixXd::Zero(2 * (Np + 1), n);
  if (second_order)
    P.d2_cab.assign(static_cast<std::size_t>(Np) + 1, Eigen::MatrixXd::Zero(n, n));

  P.x[0] = inst.x0;
  Eigen::RowVectorXd dTain(n);
  for (int i = 0; i <= Np; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    const int m = move_index(i, Nu);
    const ControlInput &u = U[static_cast<std::size_t>(m)];
    const State &x = P.x[ii];
    P.T_ain[ii] = inlet_air_temperature(x.T_evap, u.W_bl, inst.model);
    if (i == Np)
      break;

    P.x[ii + 1] = model_step(x, u, inst.w, inst.model);

    dTain = g[5] * P.dx.row(2 * i + 1);
    dTain[2 * m] += g[6];
    const double a = 1.0 - g[0] - g[1] - g[2] * u.W_bl;
    P.dx.row(2 * (i + 1)) = a * P.dx.row(2 * i) + g[2] * u.W_bl * dTain;
    P.dx(2 * (i + 1), 2 * m) += g[2] * (P.T_ain[ii] - x.T_cab);
    P.dx.row(2 * (i + 1) + 1) = (g[3] + g[4]) * P.dx.row(2 * i + 1);
    P.dx(2 * (i + 1) + 1, 2 * m + 1) -= g[4];

    if (second_order) {
      Eigen::MatrixXd &H = P.d2_cab[ii + 1];
      H = a * P.d2_cab[ii];
      const Eigen::RowVectorXd diff = dTain - P.dx.row(2 * i);
      H.row(2 * m) += g[2] * diff;
      H.col(2 * m) += g[2] * diff.transpose();
    }
  }
  return P;
}

// Hinge max(0, h) or its smoothing (h + sqrt(h^2 + eps^2)) / 2.
struct Hinge {
  double value, d1, d2;
};

Hinge hinge(double h, std::optional<double> eps) {
  if (!eps) {
    if (h > 0.0)
      return {h, 1.0, 0.0};
    return {0.0, 0.0, 0.0};
  }
  const double e = *eps;
  const double r = std::hypot(h, e);
  // Stable form of (h + r)/2 for negative h.
  const double v = h >= 0.0 ? 0.5 * (h + r) : 0.5 * e * e / (r - h);
  return {v, 0.5 * (1.0 + h / r), 0.5 * e * e / (r * r * r)};
}

struct Objective {
  double value = 0.0, power = 0.0, penalty = 0.0;
  Eigen::VectorXd g;
  Eigen::MatrixXd H;
  std::vector<State> slack_lo, slack_hi;
};

Objective objective(const OcpInstance &inst, const InputSequence &U,
                    const Propagation &P, std::optional<double> eps,
                    bool hessian) {
  const auto &g = inst.model.gamma;
  const auto &q = inst.power;
  const int Np = inst.horizon.Np;
  const int Nu = inst.horizon.Nu;
  const int Nc = inst.horizon.Nc;
  const Eigen::Index n = 2 * Nu;
  const double k = q.c_p / q.eta_cop;
  const double T_amb = inst.w.T_amb;

  Objective o;
  o.g = Eigen::VectorXd::Zero(n);
  if (hessian)
    o.H = Eigen::MatrixXd::Zero(n, n);

  Eigen::RowVectorXd dTain(n);
  for (int i = 0; i <= Np; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    const int m = move_index(i, Nu);
    const double W = U[static_cast<std::size_t>(m)].W_bl;
    const double Tain = P.T_ain[ii];
    o.power += k * W * (T_amb - Tain) + (q.beta[0] * W + q.beta[1]) * W + q.beta[2];

    dTain = g[5] * P.dx.row(2 * i + 1);
    dTain[2 * m] += g[6];
    o.g += (-k * W) * dTain.transpose();
    o.g[2 * m] += k * (T_amb - Tain) + 2.0 * q.beta[0] * W + q.beta[1];
    if (hessian) {
      o.H.row(2 * m) -= k * dTain;
      o.H.col(2 * m) -= k * dTain.transpose();
      o.H(2 * m, 2 * m) += 2.0 * q.beta[0];
    }
  }

  const auto &S = inst.schedule;
  o.slack_lo.assign(static_cast<std::size_t>(Nc) + 1, State{});
  o.slack_hi.assign(static_cast<std::size_t>(Nc) + 1, State{});
  for (int i = 0; i <= Nc; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    for (int j = 0; j < 2; ++j) {
      const double a = S.a_sl[static_cast<std::size_t>(j)];
      const double xv = state_component(P.x[ii], j);
      const double lo = state_component(S.x_lo[ii], j);
      const double hi = state_component(S.x_hi[ii], j);
      const double ex_lo = std::max(0.0, lo - xv);
      const double ex_hi = std::max(0.0, xv - hi);
      (j == 0 ? o.slack_lo[ii].T_cab : o.slack_lo[ii].T_evap) = ex_lo;
      (j == 0 ? o.slack_hi[ii].T_cab : o.slack_hi[ii].T_evap) = ex_hi;
      if (a == 0.0)
        continue;
      // sign: +1 for the upper bound (h = x - hi), -1 for the lower (h = lo - x)
      for (int side = 0; side < 2; ++side) {
        const double bound = side == 0 ? lo : hi;
        if (!std::isfinite(bound))
          continue;
        const double sign = side == 0 ? -1.0 : 1.0;
        const Hinge h = hinge(sign * (xv - bound), eps);
        o.penalty += a * h.value;
        if (i == 0)
          continue; // measured state, independent of U
        if (h.d1 != 0.0)
          o.g += (a * h.d1 * sign) * P.dx.row(2 * i + j).transpose();
        if (hessian) {
          if (h.d2 != 0.0)
            o.H += (a * h.d2) * P.dx.row(2 * i + j).transpose() * P.dx.row(2 * i + j);
          if (j == 0 && h.d1 != 0.0)
            o.H += (a * h.d1 * sign) * P.d2_cab[ii];
        }
      }
    }
  }
  o.value = o.power + o.penalty;
  return o;
}

// Minimises g'd + d'Bd/2 over lower <= d <= upper for positive definite B:
// Newton steps on the free variables with a projected backtracking search.
Eigen::VectorXd box_qp(const Eigen::MatrixXd &B, const Eigen::VectorXd &g,
                       const Eigen::VectorXd &lower, const Eigen::VectorXd &upper) {
  const Eigen::Index n = g.size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n).cwiseMax(lower).cwiseMin(upper);
  auto q = [&](const Eigen::VectorXd &v) { return g.dot(v) + 0.5 * v.dot(B * v); };
  std::vector<Eigen::Index> free_idx;
  for (int it = 0; it < 100; ++it) {
    const Eigen::VectorXd grad = g + B * x;
    free_idx.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_lo = x[i] <= lower[i] && grad[i] > 0.0;
      const bool at_hi = x[i] >= upper[i] && grad[i] < 0.0;
      if (!(at_lo || at_hi) && lower[i] < upper[i])
        free_idx.push_back(i);
    }
    if (free_idx.empty())
      break;
    const auto nf = static_cast<Eigen::Index>(free_idx.size());
    Eigen::MatrixXd Bf(nf, nf);
    Eigen::VectorXd gf(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      gf[a] = grad[free_idx[static_cast<std::size_t>(a)]];
      for (Eigen::Index b = 0; b < nf; ++b)
        Bf(a, b) = B(free_idx[static_cast<std::size_t>(a)], free_idx[static_cast<std::size_t>(b)]);
    }
    if (gf.lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + g.lpNorm<Eigen::Infinity>()))
      break;
    const Eigen::VectorXd df = Bf.ldlt().solve(-gf);
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
    for (Eigen::Index a = 0; a < nf; ++a)
      dir[free_idx[static_cast<std::size_t>(a)]] = df[a];

    const double q0 = q(x);
    double step = 1.0;
    Eigen::VectorXd xn = x;
    bool moved = false;
    for (int ls = 0; ls < 50; ++ls) {
      xn = (x + step * dir).cwiseMax(lower).cwiseMin(upper);
      if (q(xn) - q0 <= 0.1 * grad.dot(xn - x) && (xn - x).squaredNorm() > 0.0) {
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved)
      break;
    const bool done = step == 1.0 && (xn - (x + dir)).lpNorm<Eigen::Infinity>() == 0.0;
    x = xn;
    if (done)
      break;
  }
  return x;
}

// First-order residual of the exact penalty problem in unit-box coordinates.
// Penalty terms within `band` of their kink contribute a multiplier chosen
// in [0, 1] by bounded least squares on the interior variables; the rest
// use the one-sided derivative.
double stationarity(const OcpInstance &inst, const InputSequence &U,
                    const Propagation &P, const Eigen::VectorXd &span,
                    const std::vector<bool> &fixed, const Eigen::VectorXd &y,
                    double band) {
  const Eigen::Index n = y.size();
  Objective o = objective(inst, U, P, std::nullopt, false);
  const double scale = std::max(1.0, std::abs(o.value));
  Eigen::VectorXd g0 = o.g;
  std::vector<Eigen::VectorXd> cols;
  const auto &S = inst.schedule;
  for (int i = 1; i <= inst.horizon.Nc; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    for (int j = 0; j < 2; ++j) {
      const double a = S.a_sl[static_cast<std::size_t>(j)];
      if (a == 0.0)
        continue;
      const double xv = state_component(P.x[ii], j);
      for (int side = 0; side < 2; ++side) {
        const double bound = state_component(side == 0 ? S.x_lo[ii] : S.x_hi[ii], j);
        if (!std::isfinite(bound))
          continue;
        const double sign = side == 0 ? -1.0 : 1.0;
        const double h = sign * (xv - bound);
        if (std::abs(h) > band)
          continue;
        const Eigen::VectorXd c = (a * sign) * P.dx.row(2 * i + j).transpose();
        if (h > 0.0)
          g0 -= c;
        cols.push_back(c);
      }
    }
  }
  g0 = span.cwiseProduct(g0);
  for (auto &c : cols)
    c = span.cwiseProduct(c);
  for (Eigen::Index k = 0; k < n; ++k)
    if (fixed[static_cast<std::size_t>(k)]) {
      g0[k] = 0.0;
      for (auto &c : cols)
        c[k] = 0.0;
    }

  auto residual = [&](const Eigen::VectorXd &g) {
    const Eigen::VectorXd step = (y - g / scale).cwiseMax(0.0).cwiseMin(1.0);
    return (y - step).lpNorm<Eigen::Infinity>();
  };
  if (cols.empty())
    return residual(g0);

  const auto K = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd C(n, K);
  for (Eigen::Index k = 0; k < K; ++k)
    C.col(k) = cols[static_cast<std::size_t>(k)];
  // Rows of variables resting on a bound only need the right sign; fit the
  // interior ones.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k)
    w[k] = (y[k] > 0.0 && y[k] < 1.0) ? 1.0 : 0.0;
  const Eigen::MatrixXd Cw = w.asDiagonal() * C;
  Eigen::MatrixXd B = Cw.transpose() * Cw;
  B.diagonal().array() += 1e-12 * std::max(1.0, B.diagonal().maxCoeff());
  const Eigen::VectorXd theta = box_qp(B, Cw.transpose() * (w.asDiagonal() * g0),
                                       Eigen::VectorXd::Zero(K), Eigen::VectorXd::Ones(K));
  return std::min(residual(g0 + C * theta), residual(g0 + C * theta.cwiseMax(0.0).cwiseMin(1.0)));
}

void require(bool ok, const std::string &msg) {
  if (!ok)
    throw InputError(msg);
}

} // namespace

ConstraintSchedule ConstraintSchedule::uniform(const HorizonConfig &h, State x_lo,
                                               State x_hi, ControlInput u_lo,
                                               ControlInput u_hi,
                                               std::array<double, 2> a_sl) {
  ConstraintSchedule s;
  s.x_lo.assign(static_cast<std::size_t>(std::max(h.Nc, 0)) + 1, x_lo);
  s.x_hi.assign(static_cast<std::size_t>(std::max(h.Nc, 0)) + 1, x_hi);
  s.u_lo.assign(static_cast<std::size_t>(std::max(h.Nu, 0)), u_lo);
  s.u_hi.assign(static_cast<std::size_t>(std::max(h.Nu, 0)), u_hi);
  s.a_sl = a_sl;
  return s;
}

void check_instance(const OcpInstance &inst) {
  const auto &h = inst.horizon;
  const auto &s = inst.schedule;
  require(h.Np >= 1, "horizon: Np must be >= 1");
  require(h.Nu >= 1 && h.Nu <= h.Np, "horizon: need 1 <= Nu <= Np");
  require(h.Nc >= 1 && h.Nc <= h.Np, "horizon: need 1 <= Nc <= Np");
  require(h.Ts > 0.0, "horizon: Ts must be positive");
  require(std::abs(h.Ts - inst.model.Ts) <= 1e-9 * h.Ts,
          "horizon: Ts differs from the model sampling period");
  require(s.x_lo.size() == static_cast<std::size_t>(h.Nc) + 1 &&
              s.x_hi.size() == static_cast<std::size_t>(h.Nc) + 1,
          "schedule: state bounds need Nc + 1 entries");
  require(s.u_lo.size() == static_cast<std::size_t>(h.Nu) &&
              s.u_hi.size() == static_cast<std::size_t>(h.Nu),
          "schedule: input bounds need Nu entries");
  for (std::size_t i = 0; i < s.x_lo.size(); ++i) {
    require(!(s.x_lo[i].T_cab > s.x_hi[i].T_cab) &&
                !(s.x_lo[i].T_evap > s.x_hi[i].T_evap),
            "schedule: state lower bound above upper bound at step " +
                std::to_string(i));
  }
  for (std::size_t i = 0; i < s.u_lo.size(); ++i) {
    require(std::isfinite(s.u_lo[i].W_bl) && std::isfinite(s.u_hi[i].W_bl) &&
                std::isfinite(s.u_lo[i].T_evap_set) &&
                std::isfinite(s.u_hi[i].T_evap_set),
            "schedule: input bounds must be finite");
    require(s.u_lo[i].W_bl <= s.u_hi[i].W_bl &&
                s.u_lo[i].T_evap_set <= s.u_hi[i].T_evap_set,
            "schedule: input lower bound above upper bound at move " +
                std::to_string(i));
  }
  require(s.a_sl[0] >= 0.0 && s.a_sl[1] >= 0.0,
          "schedule: slack weights must be non-negative");
}

Eigen::VectorXd pack(const InputSequence &U) {
  Eigen::VectorXd z(2 * static_cast<Eigen::Index>(U.size()));
  for (std::size_t m = 0; m < U.size(); ++m) {
    z[2 * static_cast<Eigen::Index>(m)] = U[m].W_bl;
    z[2 * static_cast<Eigen::Index>(m) + 1] = U[m].T_evap_set;
  }
  return z;
}

InputSequence unpack(const Eigen::VectorXd &z) {
  InputSequence U(static_cast<std::size_t>(z.size() / 2));
  for (std::size_t m = 0; m < U.size(); ++m)
    U[m] = {z[2 * static_cast<Eigen::Index>(m)], z[2 * static_cast<Eigen::Index>(m) + 1]};
  return U;
}

Rollout rollout(const OcpInstance &inst, const InputSequence &U) {
  require(U.size() == static_cast<std::size_t>(inst.horizon.Nu),
          "rollout: input sequence must have Nu moves");
  Propagation P = propagate(inst, U, false);
  return {std::move(P.x), std::move(P.T_ain), std::move(P.dx)};
}

NlpEvaluation evaluate_nlp(const OcpInstance &inst, const InputSequence &U) {
  require(U.size() == static_cast<std::size_t>(inst.horizon.Nu),
          "evaluate_nlp: input sequence must have Nu moves");
  const Propagation P = propagate(inst, U, false);
  Objective o = objective(inst, U, P, std::nullopt, false);
  NlpEvaluation e;
  e.cost = o.value;
  e.power_cost = o.power;
  e.penalty_cost = o.penalty;
  e.gradient = std::move(o.g);
  e.slack.resize(o.slack_lo.size());
  for (std::size_t i = 0; i < e.slack.size(); ++i)
    e.slack[i] = {o.slack_lo[i].T_cab + o.slack_hi[i].T_cab,
                  o.slack_lo[i].T_evap + o.slack_hi[i].T_evap};
  e.slack_lo = std::move(o.slack_lo);
  e.slack_hi = std::move(o.slack_hi);
  return e;
}

SolveResult solve_ocp(const OcpInstance &inst, const std::optional<InputSequence> &warm,
                      const SolverOptions &opt) {
  const auto t0 = std::chrono::steady_clock::now();
  check_instance(inst);
  const int Nu = inst.horizon.Nu;
  const Eigen::Index n = 2 * Nu;
  if (warm)
    require(warm->size() == static_cast<std::size_t>(Nu),
            "solve_ocp: warm start must have Nu moves");

  // Work in unit-box coordinates: U = lo + span .* y.
  const Eigen::VectorXd lo = pack(inst.schedule.u_lo);
  const Eigen::VectorXd hi = pack(inst.schedule.u_hi);
  const Eigen::VectorXd span = hi - lo;
  std::vector<bool> fixed(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    fixed[static_cast<std::size_t>(i)] = !(span[i] > 0.0);

  Eigen::VectorXd y = Eigen::VectorXd::Constant(n, 0.5);
  if (warm) {
    const Eigen::VectorXd z = pack(*warm);
    for (Eigen::Index i = 0; i < n; ++i)
      y[i] = fixed[static_cast<std::size_t>(i)]
                 ? 0.0
                 : std::clamp((z[i] - lo[i]) / span[i], 0.0, 1.0);
  }
  for (Eigen::Index i = 0; i < n; ++i)
    if (fixed[static_cast<std::size_t>(i)])
      y[i] = 0.0;

  auto to_inputs = [&](const Eigen::VectorXd &yy) {
    Eigen::VectorXd z = lo + span.cwiseProduct(yy);
    return unpack(z.cwiseMax(lo).cwiseMin(hi));
  };

  struct Eval {
    double F;
    Eigen::VectorXd g;
    Eigen::MatrixXd H;
  };
  auto evaluate = [&](const Eigen::VectorXd &yy, double eps, bool hess) {
    const InputSequence U = to_inputs(yy);
    const Propagation P = propagate(inst, U, hess);
    Objective o = objective(inst, U, P, eps, hess);
    Eval e{o.value, span.cwiseProduct(o.g), {}};
    if (hess)
      e.H = span.asDiagonal() * o.H * span.asDiagonal();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (fixed[static_cast<std::size_t>(i)]) {
        e.g[i] = 0.0;
        if (hess) {
          e.H.row(i).setZero();
          e.H.col(i).setZero();
        }
      }
    }
    return e;
  };
  auto projected_residual = [&](const Eigen::VectorXd &yy, const Eval &e) {
    const double scale = std::max(1.0, std::abs(e.F));
    const Eigen::VectorXd step = (yy - e.g / scale).cwiseMax(0.0).cwiseMin(1.0);
    return (yy - step).lpNorm<Eigen::Infinity>();
  };

  SolveResult res;
  double eps = std::max(warm ? std::min(opt.smoothing_start, opt.warm_smoothing_start) : opt.smoothing_start,
                        opt.smoothing_final);
  int iters = 0;
  double residual = std::numeric_limits<double>::infinity();
  double exact_residual = residual;
  bool done = false;
  for (;;) {
    const bool final_stage = eps <= opt.smoothing_final * (1.0 + 1e-12);
    const double stage_tol = final_stage ? opt.tolerance : std::max(opt.tolerance, 1e-4);
    while (true) {
      // The exact problem may already be stationary, whatever the stage.
      {
        const InputSequence U = to_inputs(y);
        exact_residual = stationarity(inst, U, propagate(inst, U, false), span, fixed, y,
                                      std::max(1e3 * opt.smoothing_final, 1e-9));
        if (exact_residual <= opt.tolerance) {
          done = true;
          break;
        }
      }
      Eval e = evaluate(y, eps, true);
      residual = final_stage ? std::min(projected_residual(y, e), exact_residual)
                             : projected_residual(y, e);
      if (residual <= stage_tol || iters >= opt.max_iterations)
        break;

      // Newton model with absolute eigenvalues, minimised over the box.
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.H);
      const double floor = 1e-8 * std::max(1.0, std::abs(e.F));
      const Eigen::VectorXd lam = es.eigenvalues().cwiseAbs().cwiseMax(floor);
      const Eigen::MatrixXd B =
          es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
      Eigen::VectorXd lower = -y, upper = Eigen::VectorXd::Ones(n) - y;
      for (Eigen::Index i = 0; i < n; ++i)
        if (fixed[static_cast<std::size_t>(i)])
          lower[i] = upper[i] = 0.0;
      Eigen::VectorXd d = box_qp(B, e.g, lower, upper);

      // Armijo backtracking; the box is convex so every trial stays feasible.
      double alpha = 1.0;
      bool accepted = false;
      Eigen::VectorXd y_new(n);
      const double slope = e.g.dot(d);
      if (slope < 0.0) {
        for (int ls = 0; ls < 60; ++ls) {
          y_new = (y + alpha * d).cwiseMax(0.0).cwiseMin(1.0);
          if (evaluate(y_new, eps, false).F <= e.F + 1e-4 * alpha * slope) {
            accepted = true;
            break;
          }
          alpha *= 0.5;
        }
      }
      ++iters;
      if (!accepted) {
        // Fall back to a projected gradient step scaled by the diagonal.
        for (Eigen::Index i = 0; i < n; ++i)
          d[i] = -e.g[i] / std::max(std::abs(e.H(i, i)), floor);
        alpha = 1.0;
        for (int ls = 0; ls < 60; ++ls) {
          y_new = (y + alpha * d).cwiseMax(0.0).cwiseMin(1.0);
          const double decrease = e.g.dot(y_new - y);
          if (decrease < 0.0 && evaluate(y_new, eps, false).F <= e.F + 1e-4 * decrease) {
            accepted = true;
            break;
          }
          alpha *= 0.5;
        }
      }
      if (!accepted)
        break; // no further progress possible at this smoothing level
      y = y_new;
    }
    if (done) {
      residual = exact_residual;
      break;
    }
    if (final_stage || iters >= opt.max_iterations)
      break;
    eps = std::max(eps * opt.smoothing_factor, opt.smoothing_final);
  }

  res.U = to_inputs(y);
  const NlpEvaluation ev = evaluate_nlp(inst, res.U);
  res.x_pred = rollout(inst, res.U).x;
  res.slack = ev.slack;
  res.slack_lo = ev.slack_lo;
  res.slack_hi = ev.slack_hi;
  res.cost = ev.cost;
  res.power_cost = ev.power_cost;
  res.penalty_cost = ev.penalty_cost;
  res.iterations = iters;
  res.residual = residual;
  res.converged = residual <= opt.tolerance;
  res.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return res;
}

namespace {

std::vector<double> grid_axis(double lo, double hi, double step) {
  std::vector<double> v;
  if (!(step > 0.0))
    throw InputError("brute_force_ocp: grid step must be positive");
  const double n = (hi - lo) / step;
  const auto count = static_cast<long>(std::floor(n + 1e-9));
  v.reserve(static_cast<std::size_t>(count) + 2);
  for (long k = 0; k <= count; ++k)
    v.push_back(lo + static_cast<double>(k) * step);
  if (hi - v.back() > 1e-9 * std::max(1.0, std::abs(hi)))
    v.push_back(hi);
  else
    v.back() = hi;
  return v;
}

// Exact evaluate_nlp cost without derivatives, for a full input sequence.
double plain_cost(const OcpInstance &inst, const InputSequence &U) {
  const int Np = inst.horizon.Np;
  const int Nc = inst.horizon.Nc;
  const int Nu = inst.horizon.Nu;
  const auto &S = inst.schedule;
  double cost = 0.0;
  State x = inst.x0;
  for (int i = 0; i <= Np; ++i) {
    const ControlInput &u = U[static_cast<std::size_t>(move_index(i, Nu))];
    cost += stage_cost(x, u, inst.w.T_amb, inst.model, inst.power);
    if (i <= Nc) {
      const auto ii = static_cast<std::size_t>(i);
      for (int j = 0; j < 2; ++j) {
        const double xv = state_component(x, j);
        const double v = std::max({0.0, state_component(S.x_lo[ii], j) - xv,
                                   xv - state_component(S.x_hi[ii], j)});
        cost += S.a_sl[static_cast<std::size_t>(j)] * v;
      }
    }
    if (i < Np)
      x = model_step(x, u, inst.w, inst.model);
  }
  return cost;
}

} // namespace

BruteForceResult brute_force_ocp(const OcpInstance &inst, const GridResolution &grid) {
  check_instance(inst);
  const int Nu = inst.horizon.Nu;
  if (Nu > 2)
    throw InputError("brute_force_ocp: refusing control horizon Nu > 2");

  const auto &S = inst.schedule;
  std::vector<std::vector<double>> W_axis, T_axis;
  for (int m = 0; m < Nu; ++m) {
    const auto mm = static_cast<std::size_t>(m);
    W_axis.push_back(grid_axis(S.u_lo[mm].W_bl, S.u_hi[mm].W_bl, grid.W_bl));
    T_axis.push_back(grid_axis(S.u_lo[mm].T_evap_set, S.u_hi[mm].T_evap_set,
                               grid.T_evap_set));
  }

  BruteForceResult best;
  best.cost = std::numeric_limits<double>::infinity();
  InputSequence U(static_cast<std::size_t>(Nu));

  if (Nu == 1) {
    for (double W : W_axis[0]) {
      for (double T : T_axis[0]) {
        U[0] = {W, T};
        const double c = plain_cost(inst, U);
        ++best.evaluations;
        if (c < best.cost) {
          best.cost = c;
          best.U = U;
        }
      }
    }
    return best;
  }

  // Nu == 2: terms fixed by the first move are accumulated once per outer
  // point, the remainder is evaluated in the inner loop.
  const int Np = inst.horizon.Np;
  const int Nc = inst.horizon.Nc;
  auto penalty = [&](const State &x, int i) {
    if (i > Nc)
      return 0.0;
    const auto ii = static_cast<std::size_t>(i);
    double c = 0.0;
    for (int j = 0; j < 2; ++j) {
      const double xv = state_component(x, j);
      const double v = std::max({0.0, state_component(S.x_lo[ii], j) - xv,
                                 xv - state_component(S.x_hi[ii], j)});
      c += S.a_sl[static_cast<std::size_t>(j)] * v;
    }
    return c;
  };
  const double fixed_part = penalty(inst.x0, 0);
  for (double W0 : W_axis[0]) {
    for (double T0 : T_axis[0]) {
      const ControlInput u0{W0, T0};
      const State x1 = model_step(inst.x0, u0, inst.w, inst.model);
      const double head = fixed_part +
                          stage_cost(inst.x0, u0, inst.w.T_amb, inst.model, inst.power) +
                          penalty(x1, 1);
      for (double W1 : W_axis[1]) {
        // the set-point only acts through the next evaporator state
        const double mid =
            head + stage_cost(x1, {W1, 0.0}, inst.w.T_amb, inst.model, inst.power);
        for (double T1 : T_axis[1]) {
          const ControlInput u1{W1, T1};
          double c = mid;
          State x = x1;
          for (int i = 2; i <= Np; ++i) {
            x = model_step(x, u1, inst.w, inst.model);
            c += stage_cost(x, u1, inst.w.T_amb, inst.model, inst.power) + penalty(x, i);
          }
          ++best.evaluations;
          if (c < best.cost) {
            best.cost = c;
            best.U = {u0, u1};
          }
        }
      }
    }
  }
  return best;
}

MpcStepResult mpc_step(const OcpInstance &inst, const std::optional<SolveResult> &previous,
                       const SolverOptions &opt) {
  std::optional<InputSequence> warm;
  const auto Nu = static_cast<std::size_t>(inst.horizon.Nu);
  if (previous && previous->U.size() == Nu && Nu > 0) {
    InputSequence w(previous->U.begin() + 1, previous->U.end());
    w.push_back(previous->U.back());
    warm = std::move(w);
  }
  MpcStepResult r;
  r.solve = solve_ocp(inst, warm, opt);
  r.applied = r.solve.U.front();
  return r;
}

} // namespace acmpc
