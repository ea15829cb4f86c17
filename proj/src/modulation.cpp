#include "dnls/modulation.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <sstream>

#include "dnls/errors.hpp"

namespace dnls {

namespace {

Eigen::Vector2d orthogonality(const Field& v, const BoundState& st) {
  return {inner(v, st.D1Q).imag(), inner(v, st.D2Q).imag()};
}

const Field& DQj(const BoundState& st, int j) { return j == 0 ? st.D1Q : st.D2Q; }

// d f_j / d z_k for f_j = Im<u - Q, D_j Q>.
Eigen::Matrix2d newton_matrix(const Field& v, const BoundState& st, const std::array<std::array<Field, 2>, 2>& D2) {
  Eigen::Matrix2d J;
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) J(j, k) = inner(DQj(st, j), DQj(st, k)).imag() + inner(v, D2[j][k]).imag();
  return J;
}

template <int K>
cplx gauss_unit(const std::function<cplx(double)>& f) {
  return boost::math::quadrature::gauss<double, K>::integrate(f, 0.0, 1.0);
}

// Gauss-Legendre on [0,1] with K = p/2 + 1 nodes, exact for degree-p polynomials.
cplx theta_integral(int p, const std::function<cplx(double)>& f) {
  switch (p / 2 + 1) {
    case 3: return gauss_unit<3>(f);
    case 4: return gauss_unit<4>(f);
    case 5: return gauss_unit<5>(f);
    case 6: return gauss_unit<6>(f);
    case 7: return gauss_unit<7>(f);
    case 8: return gauss_unit<8>(f);
    case 9: return gauss_unit<9>(f);
    case 10: return gauss_unit<10>(f);
    case 11: return gauss_unit<11>(f);
    default: throw ConfigError("remainder quadrature supports p <= 20");
  }
}

}  // namespace

Decomposition extract_z(BoundStateSolver& solver, const Field& u, std::optional<cplx> z_guess,
                        const ExtractOptions& opt) {
  const DeltaHamiltonian& H = solver.hamiltonian();
  Decomposition dec;
  dec.u_h1 = h1_norm(u);
  if (dec.u_h1 > opt.delta_max) {
    std::ostringstream os;
    os << "||u||_H1 = " << dec.u_h1 << " exceeds the smallness threshold " << opt.delta_max;
    throw NumericalError(os.str());
  }
  const cplx seed = z_guess ? *z_guess : inner(H.phi0_discrete(), u);
  const double radius = 0.5 * std::abs(seed) + 0.05;
  cplx z = seed;
  for (int it = 0; it <= opt.max_newton; ++it) {
    BoundState st = solver.solve(z);
    Field v = u - st.Q;
    const Eigen::Vector2d f = orthogonality(v, st);
    dec.residual_history.push_back(f.norm());
    auto D2 = solver.D2Q_all(st);
    if (f.norm() < opt.tol) {
      dec.z = z;
      dec.state = std::move(st);
      dec.v = std::move(v);
      dec.orthogonality = orthogonality(dec.v, dec.state);
      dec.D2Q = std::move(D2);
      dec.newton_iterations = it;
      dec.v_h1 = h1_norm(dec.v);
      dec.size_ratio = dec.u_h1 > 0 ? (dec.v_h1 + std::abs(z)) / dec.u_h1 : 0.0;
      return dec;
    }
    if (it == opt.max_newton) break;
    const Eigen::Matrix2d J = newton_matrix(v, st, D2);
    const Eigen::Vector2d step = -J.fullPivLu().solve(f);
    cplx zn = z + cplx(step(0), step(1));
    // Stay inside the trust region around the seed.
    if (std::abs(zn - seed) > radius) zn = seed + radius * (zn - seed) / std::abs(zn - seed);
    z = zn;
  }
  std::ostringstream os;
  os << "Newton iteration for z did not converge in " << opt.max_newton << " steps; residual history:";
  for (double r : dec.residual_history) os << ' ' << r;
  throw NumericalError(os.str());
}

Field remainder_G(const Field& v, const Field& Q, const ModelParams& prm) {
  require_same_grid(v, Q);
  Field G(v.grid());
  const int p = prm.p;
  const double a = 0.5 * (p + 2) * prm.mu, c = 0.5 * p * prm.mu;
  for (int j = 0; j < v.size(); ++j) {
    const cplx vj = v[j], qj = Q[j];
    if (vj == 0.0) continue;
    const double q2 = std::norm(qj);
    const double qp = std::pow(q2, 0.5 * p);
    const cplx qp2 = p >= 2 ? std::pow(q2, 0.5 * (p - 2)) * qj * qj : cplx(0);
    const cplx I1 = theta_integral(p, [&](double th) { return cplx(std::pow(std::norm(qj + th * vj), 0.5 * p) - qp); });
    const cplx I2 = theta_integral(p, [&](double th) {
      const cplx w = qj + th * vj;
      return std::pow(std::norm(w), 0.5 * (p - 2)) * w * w - qp2;
    });
    G[j] = a * vj * I1 + c * std::conj(vj) * I2;
  }
  return G;
}

ModulationODE ode_coefficients(const Decomposition& dec, const ModelParams& prm) {
  ModulationODE ode;
  const BoundState& st = dec.state;
  ode.A = newton_matrix(dec.v, st, dec.D2Q);
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k)
      ode.jacobian(j, k) = -inner(DQj(st, j), DQj(st, k)).imag() + inner(dec.v, dec.D2Q[j][k]).imag();
  const Field G = remainder_G(dec.v, st.Q, prm);
  for (int j = 0; j < 2; ++j) ode.b(j) = -inner(G, DQj(st, j)).real();
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(ode.A);
  const auto s = svd.singularValues();
  ode.cond = s(1) > 0 ? s(0) / s(1) : INFINITY;
  ode.ill_conditioned = ode.cond > 1e3;
  ode.rhs = ode.A.fullPivLu().solve(ode.b);
  ode.E = st.E;
  return ode;
}

void ZWAccumulator::add(const BoundState& st) {
  const Field& Q = st.Q;
  const auto& g = *Q.grid();
  const int N = g.N();
  if (q_weighted_sup_x.empty()) {
    q_weighted_sup_x.assign(N, 0.0);
    dq_weighted_sup_x.assign(N, 0.0);
  }
  const Field Qx = derivative(Q), D1x = derivative(st.D1Q), D2x = derivative(st.D2Q);
  const RVec& w = g.weights();
  double dq_l2 = 0, dqx_l2 = 0;
  for (int j = 0; j < N; ++j) {
    const double jx = japanese(g.x(j));
    const double qw = std::pow(jx, 2.5) * std::abs(Q[j]);
    const double dq = std::sqrt(std::norm(st.D1Q[j]) + std::norm(st.D2Q[j]));
    q_weighted_sup_x[j] = std::max(q_weighted_sup_x[j], qw);
    dq_weighted_sup_x[j] = std::max(dq_weighted_sup_x[j], jx * dq);
    q_weighted_sup = std::max(q_weighted_sup, qw);
    qx_sup = std::max(qx_sup, std::abs(Qx[j]));
    dq_l2 += w[j] * jx * jx * dq * dq;
    dqx_l2 += w[j] * (std::norm(D1x[j]) + std::norm(D2x[j]));
  }
  qx_l2_sup = std::max(qx_l2_sup, l2_norm(Qx));
  dq_weighted_l2_sup = std::max(dq_weighted_l2_sup, std::sqrt(dq_l2));
  dqx_l2_sup = std::max(dqx_l2_sup, std::sqrt(dqx_l2));
  z_sup = std::max(z_sup, std::abs(st.z));
}

Tracker::Tracker(BoundStateSolver& solver, TrackOptions opt, Hook hook)
    : solver_(solver), opt_(opt), hook_(std::move(hook)) {}

bool Tracker::push(double t, const Field& u) {
  if (mt_.truncated) return false;
  Decomposition dec;
  try {
    dec = extract_z(solver_, u, prev_, opt_.extract);
  } catch (const NumericalError& e) {
    mt_.truncated = true;
    std::ostringstream os;
    os << "tracking truncated at t = " << t << ": " << e.what();
    mt_.message = os.str();
    return false;
  }
  const double E = dec.state.E;
  if (!mt_.t.empty()) phase_ += 0.5 * (t - mt_.t.back()) * (E + mt_.E.back());
  mt_.t.push_back(t);
  mt_.z.push_back(dec.z);
  mt_.E.push_back(E);
  mt_.zeta.push_back(dec.z * std::exp(cplx(0, phase_)));
  if (opt_.ode) {
    const ModulationODE ode = ode_coefficients(dec, solver_.params());
    mt_.rhs.push_back(cplx(ode.rhs(0), ode.rhs(1)));
    mt_.cond.push_back(ode.cond);
  }
  mt_.orthogonality.push_back(dec.orthogonality.cwiseAbs().maxCoeff());
  mt_.v_h1.push_back(dec.v_h1);
  mt_.phi0_coupling.push_back(std::abs(inner(solver_.hamiltonian().phi0_discrete(), dec.v)));
  mt_.zw.add(dec.state);
  prev_ = dec.z;
  if (hook_) hook_(t, dec);
  return true;
}

ModulationTrajectory Tracker::finish() {
  ModulationTrajectory mt = mt_;
  const size_t n = mt.t.size();
  mt.fd_rate.assign(n, 0.0);
  mt.ode_residual.assign(n, 0.0);
  auto derivative = [&](const CVec& y, size_t m) {
    if (n < 3) return (y[n - 1] - y[0]) / (mt.t[n - 1] - mt.t[0]);
    if (m == 0) return (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (mt.t[2] - mt.t[0]);
    if (m == n - 1) return (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (mt.t[n - 1] - mt.t[n - 3]);
    return (y[m + 1] - y[m - 1]) / (mt.t[m + 1] - mt.t[m - 1]);
  };
  if (n >= 2) {
    for (size_t m = 0; m < n; ++m) {
      // zdot + iEz = e^{-i theta} d zeta/dt; differencing the slow zeta avoids the O(dt^2 E^3 |z|) error of
      // differencing the rotating z. Second-order one-sided differences at the ends.
      const cplx rate = std::abs(mt.zeta[m]) > 0 ? derivative(mt.zeta, m) * mt.z[m] / mt.zeta[m]
                                                 : derivative(mt.z, m) + cplx(0, mt.E[m]) * mt.z[m];
      mt.fd_rate[m] = std::abs(rate);
      if (!mt.rhs.empty()) mt.ode_residual[m] = std::abs(rate - mt.rhs[m]);
    }
  }
  return mt;
}

ModulationTrajectory track(BoundStateSolver& solver, const Trajectory& traj, const TrackOptions& opt) {
  if (traj.snapshots.size() != traj.times.size())
    throw ConfigError("trajectory was recorded without snapshots; track it with a Tracker observer");
  Tracker tr(solver, opt);
  for (size_t m = 0; m < traj.times.size(); ++m)
    if (!tr.push(traj.times[m], traj.snapshots[m])) break;
  return tr.finish();
}

ZAsymptotic z_asymptotic(const ModulationTrajectory& mt) {
  ZAsymptotic r;
  if (mt.zeta.empty()) {
    r.converged = false;
    return r;
  }
  r.z_plus = mt.zeta.back();
  const double T = mt.t.back();
  for (size_t m = 0; m < mt.t.size(); ++m)
    if (mt.t[m] > 0.5 * T) r.tail = std::max(r.tail, std::abs(mt.zeta[m] - r.z_plus));
  r.converged = r.tail <= std::abs(r.z_plus) / 10;
  return r;
}

}  // namespace dnls
