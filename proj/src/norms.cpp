#include "dnls/norms.hpp"

#include <algorithm>
#include <boost/math/statistics/bivariate_statistics.hpp>
#include <boost/math/statistics/linear_regression.hpp>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "dnls/errors.hpp"

namespace dnls {

void XNormAccumulator::add(const Field& v) {
  const auto& g = *v.grid();
  const int N = g.N();
  const Field vx = derivative(v);
  RVec wv(N), dv(N);
  for (int j = 0; j < N; ++j) {
    wv[j] = std::norm(v[j]) * std::pow(japanese(g.x(j)), -3.0);
    dv[j] = std::norm(vx[j]);
  }
  const double s = sup_norm(v), s4 = s * s * s * s;
  linf_h1_ = std::max(linf_h1_, h1_norm(v));
  if (count_ == 0) {
    w_sum_.assign(N, 0.0);
    d_sum_.assign(N, 0.0);
    first_w_ = wv;
    first_d_ = dv;
    first_l4_ = s4;
  }
  for (int j = 0; j < N; ++j) {
    w_sum_[j] += wv[j];
    d_sum_[j] += dv[j];
  }
  l4_sum_ += s4;
  last_w_ = std::move(wv);
  last_d_ = std::move(dv);
  last_l4_ = s4;
  ++count_;
}

XNorm XNormAccumulator::result() const {
  if (count_ == 0) throw ConfigError("X norm over an empty window");
  XNorm x;
  x.linf_h1 = linf_h1_;
  if (count_ == 1) return x;
  // Trapezoid: full weights minus half of the end samples.
  x.l4_linf = std::pow(dt_ * (l4_sum_ - 0.5 * (first_l4_ + last_l4_)), 0.25);
  double wmax = 0, dmax = 0;
  for (size_t j = 0; j < w_sum_.size(); ++j) {
    wmax = std::max(wmax, dt_ * (w_sum_[j] - 0.5 * (first_w_[j] + last_w_[j])));
    dmax = std::max(dmax, dt_ * (d_sum_[j] - 0.5 * (first_d_[j] + last_d_[j])));
  }
  x.weighted_lxinf_lt2 = std::sqrt(wmax);
  x.deriv_lxinf_lt2 = std::sqrt(dmax);
  return x;
}

XNorm x_norm(const std::vector<Field>& v_snapshots, double dt_out) {
  XNormAccumulator acc(dt_out);
  for (const auto& v : v_snapshots) acc.add(v);
  return acc.result();
}

namespace {

double trapezoid(const RVec& t, const RVec& f) {
  double s = 0;
  for (size_t m = 1; m < t.size(); ++m) s += 0.5 * (t[m] - t[m - 1]) * (f[m] + f[m - 1]);
  return s;
}

RVec squares(const RVec& f) {
  RVec r(f.size());
  for (size_t m = 0; m < f.size(); ++m) r[m] = f[m] * f[m];
  return r;
}

}  // namespace

YNorm y_norm(const ModulationTrajectory& mt) {
  YNorm y;
  if (mt.t.size() < 2) return y;
  RVec a(mt.rhs.size());
  for (size_t m = 0; m < a.size(); ++m) a[m] = std::abs(mt.rhs[m]);
  if (!a.empty()) {
    y.l1 = trapezoid(mt.t, a);
    y.l2 = std::sqrt(trapezoid(mt.t, squares(a)));
  }
  y.fd_l1 = trapezoid(mt.t, mt.fd_rate);
  y.fd_l2 = std::sqrt(trapezoid(mt.t, squares(mt.fd_rate)));
  return y;
}

ZWNorms zw_norms(const ModulationTrajectory& mt, const SpatialGrid& g) {
  ZWNorms r;
  const ZWAccumulator& a = mt.zw;
  if (a.q_weighted_sup_x.empty()) return r;
  const RVec& w = g.weights();
  double zq = 0, wq = 0;
  for (int j = 0; j < g.N(); ++j) {
    zq += w[j] * a.q_weighted_sup_x[j];
    wq += w[j] * a.dq_weighted_sup_x[j];
  }
  r.Z = zq + a.q_weighted_sup + a.qx_sup + a.qx_l2_sup;
  r.W = wq + a.dq_weighted_l2_sup + a.dqx_l2_sup;
  r.z_sup = a.z_sup;
  r.Z_over_zsup = a.z_sup > 0 ? r.Z / a.z_sup : 0.0;
  return r;
}

double loglog_slope(const RVec& x, const RVec& y) {
  RVec lx(x.size()), ly(y.size());
  for (size_t i = 0; i < x.size(); ++i) {
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  auto [c0, c1] = boost::math::statistics::simple_ordinary_least_squares(lx, ly);
  (void)c0;
  return c1;
}

namespace {

RVec ranks(const RVec& a) {
  std::vector<size_t> idx(a.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](size_t i, size_t j) { return a[i] < a[j]; });
  RVec r(a.size());
  for (size_t i = 0; i < idx.size();) {
    size_t j = i;
    while (j + 1 < idx.size() && a[idx[j + 1]] == a[idx[i]]) ++j;
    const double avg = 0.5 * (i + j);
    for (size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(const RVec& a, const RVec& b) {
  if (a.size() < 2) return 0;
  return boost::math::statistics::correlation_coefficient(ranks(a), ranks(b));
}

void ScatteringAccumulator::add(double t, const Field& v) {
  t_.push_back(t);
  w_.push_back(H_.propagate_linear(H_.project_pc(v), -t));
  const cplx a = H_.bound_coefficient(v);
  phi_.push_back(std::abs(a) * h1_norm(H_.phi0_discrete()));
}

ScatteringState ScatteringAccumulator::finish() const {
  ScatteringState s;
  if (w_.empty()) return s;
  s.v_plus = w_.back();
  s.times = t_;
  s.phi0_component = phi_;
  for (const auto& w : w_) s.cauchy_tail.push_back(h1_norm(w - s.v_plus));
  const double T = t_.back();
  RVec lt, lc;
  for (size_t m = 0; m + 1 < t_.size(); ++m)
    if (t_[m] >= 0.5 * T) {
      lt.push_back(t_[m]);
      lc.push_back(s.cauchy_tail[m]);
    }
  s.spearman_late = spearman(lt, lc);
  return s;
}

ScatteringState extract_scattering_state(const DeltaHamiltonian& H, const RVec& times,
                                         const std::vector<Field>& v_snapshots) {
  ScatteringAccumulator acc(H);
  for (size_t m = 0; m < times.size(); ++m) acc.add(times[m], v_snapshots[m]);
  return acc.finish();
}

namespace {

struct Bump {
  double center, width, k0;
};

std::vector<Bump> ensemble(std::mt19937_64& rng, int n, const LinearCheckConfig& cfg) {
  std::uniform_real_distribution<double> c(-cfg.center_max, cfg.center_max), w(cfg.width_min, cfg.width_max),
      k(-cfg.k0_max, cfg.k0_max);
  std::vector<Bump> out;
  for (int i = 0; i < n; ++i) out.push_back({c(rng), w(rng), k(rng)});
  return out;
}

Field bump_field(const GridPtr& g, const Bump& b) {
  return sample(g, [&](double x) {
    const double s = (x - b.center) / b.width;
    return std::exp(-0.5 * s * s) * std::exp(cplx(0, b.k0 * x));
  });
}

// Space-time norms of a sequence u(t_n), t_n = n dt, built on the fly.
struct SpaceTime {
  double dt;
  RVec w_sum, d_sum, wgt;  // per-x sums of |<x>^a u|^2 and |d_x u|^2
  double l4 = 0, linf_l2 = 0;
  int n = 0;
  SpaceTime(const SpatialGrid& g, double dt_, double weight_power) : dt(dt_), w_sum(g.N()), d_sum(g.N()), wgt(g.N()) {
    for (int j = 0; j < g.N(); ++j) wgt[j] = std::pow(japanese(g.x(j)), 2 * weight_power);
  }
  void add(const Field& u, bool endpoint) {
    const double c = endpoint ? 0.5 : 1.0;
    const Field ux = derivative(u);
    for (int j = 0; j < u.size(); ++j) {
      w_sum[j] += c * dt * wgt[j] * std::norm(u[j]);
      d_sum[j] += c * dt * std::norm(ux[j]);
    }
    const double s = sup_norm(u);
    l4 += c * dt * s * s * s * s;
    linf_l2 = std::max(linf_l2, l2_norm(u));
    ++n;
  }
  double weighted() const { return std::sqrt(*std::max_element(w_sum.begin(), w_sum.end())); }
  double deriv() const { return std::sqrt(*std::max_element(d_sum.begin(), d_sum.end())); }
  double strichartz() const { return std::pow(l4, 0.25) + linf_l2; }
};

double weighted_l1(const Field& f, double power) {
  const auto& g = *f.grid();
  double s = 0;
  for (int j = 0; j < g.N(); ++j) s += g.weights()[j] * std::pow(japanese(g.x(j)), power) * std::abs(f[j]);
  return s;
}

double weighted_l2(const Field& f, double power) {
  const auto& g = *f.grid();
  double s = 0;
  for (int j = 0; j < g.N(); ++j) s += g.weights()[j] * std::pow(japanese(g.x(j)), 2 * power) * std::norm(f[j]);
  return std::sqrt(s);
}

// Homogeneous flow sampled at n dt, n = 0..steps; returns (Strichartz, LS1, LS2 numerators).
SpaceTime homogeneous(const DeltaHamiltonian& H, const Field& f, double dt, int steps) {
  SpaceTime st(*H.grid(), dt, -1.5);
  auto c = H.forward(H.project_pc(f));
  const auto ph = H.phases(dt);
  for (int n = 0; n <= steps; ++n) {
    if (n > 0) H.apply_phases(c, ph);
    st.add(H.inverse(c), n == 0 || n == steps);
  }
  return st;
}

// Duhamel integral of F(s) = g e^{-i omega s} by composite trapezoid in s.
SpaceTime duhamel(const DeltaHamiltonian& H, const Field& gfun, double omega, double dt, int steps) {
  SpaceTime st(*H.grid(), dt, -1.0);
  const auto gc = H.forward(H.project_pc(gfun));
  const auto ph = H.phases(dt);
  SectorCoeffs S{CVec(gc.even.size(), 0.0), CVec(gc.odd.size(), 0.0)};
  auto add_scaled = [](SectorCoeffs& a, const SectorCoeffs& b, cplx s) {
    for (size_t n = 0; n < a.even.size(); ++n) a.even[n] += s * b.even[n];
    for (size_t n = 0; n < a.odd.size(); ++n) a.odd[n] += s * b.odd[n];
  };
  for (int n = 0; n <= steps; ++n) {
    if (n > 0) {
      add_scaled(S, gc, 0.5 * dt * std::exp(cplx(0, -omega * (n - 1) * dt)));
      H.apply_phases(S, ph);
      add_scaled(S, gc, 0.5 * dt * std::exp(cplx(0, -omega * n * dt)));
    }
    // -i factor does not change any norm.
    st.add(H.inverse(S), n == 0 || n == steps);
  }
  return st;
}

}  // namespace

LinearCheckReport check_linear_estimates(const LinearCheckConfig& cfg) {
  LinearCheckReport rep;
  std::mt19937_64 rng(cfg.seed);

  // Dispersive decay on a large box.
  {
    auto g = make_grid(cfg.L, cfg.N);
    DeltaHamiltonian H(g, cfg.q);
    const auto bumps = ensemble(rng, cfg.dispersive_samples, cfg);
    RVec ts(cfg.t_points), envelope(cfg.t_points, 0.0);
    for (int i = 0; i < cfg.t_points; ++i)
      ts[i] = cfg.t_min * std::pow(cfg.t_max / cfg.t_min, double(i) / (cfg.t_points - 1));
    InequalityCheck chk;
    chk.name = "dispersive";
    std::ostringstream os;
    os << cfg.dispersive_samples << " Gaussian wavepackets (width " << cfg.width_min << "-" << cfg.width_max
       << ", |center| <= " << cfg.center_max << ", |k0| <= " << cfg.k0_max << "), t in ["
       << cfg.t_min << ", " << cfg.t_max << "], L = " << cfg.L << ", N = " << cfg.N << ", seed " << cfg.seed;
    chk.ensemble = os.str();
    for (const auto& b : bumps) {
      const Field f = bump_field(g, b);
      const double l1 = l1_norm(f);
      double worst = 0;
      for (int i = 0; i < cfg.t_points; ++i) {
        const double s = sup_norm(H.propagate_pc(f, ts[i])) / l1;
        envelope[i] = std::max(envelope[i], s);
        worst = std::max(worst, s * std::sqrt(ts[i]));
      }
      chk.ratios.push_back(worst);
    }
    chk.max_ratio = *std::max_element(chk.ratios.begin(), chk.ratios.end());
    chk.fitted_exponent = loglog_slope(ts, envelope);
    rep.checks.push_back(chk);
    for (double t : {cfg.t_min, cfg.t_max})
      rep.trivial_lhs = std::max(rep.trivial_lhs, sup_norm(H.propagate_pc(H.phi0_discrete(), t)));
  }

  // Strichartz, local smoothing and inhomogeneous estimates on a moderate box.
  const int steps = static_cast<int>(std::lround(cfg.smoothing_T / cfg.smoothing_dt));
  auto run = [&](int N, bool full) {
    auto g = make_grid(cfg.smoothing_L, N);
    DeltaHamiltonian H(g, cfg.q);
    std::mt19937_64 r2(cfg.seed + 1);
    const auto bumps = ensemble(r2, cfg.samples, cfg);
    std::uniform_real_distribution<double> om(0.0, 3.0);
    std::vector<InequalityCheck> out(full ? 6 : 1);
    const char* names[] = {"strichartz_L4Linf_LinfL2", "local_smoothing_weighted", "local_smoothing_derivative",
                           "inhomogeneous_weighted", "inhomogeneous_derivative", "corollary_weighted_L2"};
    for (size_t k = 0; k < out.size(); ++k) {
      out[k].name = names[k];
      std::ostringstream os;
      os << cfg.samples << " Gaussian wavepackets, T = " << cfg.smoothing_T << ", dt = " << cfg.smoothing_dt
         << ", L = " << cfg.smoothing_L << ", N = " << N << ", seed " << cfg.seed + 1;
      out[k].ensemble = os.str();
    }
    for (const auto& b : bumps) {
      const Field f = bump_field(g, b);
      const double omega = om(r2);
      const SpaceTime h = homogeneous(H, f, cfg.smoothing_dt, steps);
      out[0].ratios.push_back(h.strichartz() / l2_norm(f));
      if (!full) continue;
      out[1].ratios.push_back(h.weighted() / l2_norm(f));
      out[2].ratios.push_back(h.deriv() / hs_norm(f, 0.5));
      const SpaceTime d = duhamel(H, f, omega, cfg.smoothing_dt, steps);
      const double sqT = std::sqrt(cfg.smoothing_T);
      out[3].ratios.push_back(d.weighted() / (weighted_l1(f, 1.0) * sqT));
      out[4].ratios.push_back(d.deriv() / (l1_norm(f) * sqT));
      out[5].ratios.push_back(d.strichartz() / (weighted_l2(f, 2.5) * sqT));
    }
    if (full) {
      const SpaceTime z = homogeneous(H, H.phi0_discrete(), cfg.smoothing_dt, 50);
      rep.trivial_lhs = std::max({rep.trivial_lhs, z.strichartz(), z.weighted(), z.deriv()});
    }
    for (auto& c : out) c.max_ratio = *std::max_element(c.ratios.begin(), c.ratios.end());
    return out;
  };
  for (auto& c : run(cfg.smoothing_N, true)) rep.checks.push_back(c);
  if (cfg.refine) {
    auto fine = run(2 * cfg.smoothing_N, false);
    fine[0].name = "strichartz_L4Linf_LinfL2_refined";
    rep.checks.push_back(fine[0]);
  }
  return rep;
}

}  // namespace dnls
