#include "dnls/nls_solver.hpp"

#include <cmath>
#include <sstream>

#include "dnls/errors.hpp"
#include "dnls/simd.hpp"

namespace dnls {

Scheme parse_scheme(const std::string& s) {
  if (s == "strang") return Scheme::Strang;
  if (s == "picard") return Scheme::Picard;
  if (s == "crank_nicolson") return Scheme::CrankNicolson;
  throw ConfigError("unknown scheme '" + s + "' (strang, picard, crank_nicolson)");
}

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Strang: return "strang";
    case Scheme::Picard: return "picard";
    case Scheme::CrankNicolson: return "crank_nicolson";
  }
  return "?";
}

void EvolutionConfig::validate() const {
  if (!(time.dt > 0) || !(time.T >= time.dt) || time.stride < 1) throw ConfigError("invalid time grid");
  if (absorber_width < 0 || absorber_width > 0.1) throw ConfigError("absorber must lie in the outer 10% of the grid");
  if (absorber_strength < 0) throw ConfigError("absorber strength must be nonnegative");
  if (!(mass_drift_tol > 0) || !(energy_drift_tol > 0) || !(blowup_threshold > 0))
    throw ConfigError("conservation thresholds must be positive");
}

Field step_strang(const DeltaHamiltonian& H, const Field& u, double dt, const ModelParams& prm) {
  Field w = u;
  simd::nonlinear_phase(w.data(), w.size(), 0.5 * dt * prm.mu, prm.p);
  w = H.propagate_linear(w, dt);
  simd::nonlinear_phase(w.data(), w.size(), 0.5 * dt * prm.mu, prm.p);
  return w;
}

namespace {

// Quadratic ramp gamma(x) on the outer layer; returns per-node damping factors exp(-gamma dt_sub).
struct Absorber {
  std::vector<int> idx;
  RVec factor;
  Absorber(const SpatialGrid& g, double width, double strength, double dt_sub) {
    if (width <= 0 || strength <= 0) return;
    const double L = g.L(), inner = (1 - width) * L;
    for (int j = 0; j < g.N(); ++j) {
      const double ax = std::fabs(g.x(j));
      if (ax <= inner) continue;
      const double s = (ax - inner) / (width * L);
      idx.push_back(j);
      factor.push_back(std::exp(-strength * s * s * dt_sub));
    }
  }
  // Damps u on the layer and returns the weighted mass removed.
  double apply(Field& u, const RVec& w) const {
    double lost = 0;
    for (size_t k = 0; k < idx.size(); ++k) {
      const int j = idx[k];
      const double before = std::norm(u[j]);
      u[j] *= factor[k];
      lost += w[j] * (before - std::norm(u[j]));
    }
    return lost;
  }
};

class DriftMonitor {
 public:
  DriftMonitor(const EvolutionConfig& cfg, bool check_energy) : cfg_(cfg), check_energy_(check_energy) {}

  void record(Trajectory& tr, double t, const Field& u, double mass, double energy, double absorbed) {
    if (!u.finite() || sup_norm(u) > cfg_.blowup_threshold) {
      std::ostringstream os;
      os << "blow-up proxy triggered at t = " << t << " (sup|u| = " << sup_norm(u) << ")";
      throw NumericalError(os.str());
    }
    tr.times.push_back(t);
    tr.mass.push_back(mass);
    tr.energy.push_back(energy);
    tr.absorbed.push_back(absorbed);
    tr.origin_modulus.push_back(std::abs(u.at_origin()));
    if (tr.times.size() == 1) return;
    const double M0 = tr.mass.front(), E0 = tr.energy.front();
    if (M0 == 0) return;
    const double span = std::max(t, 1.0);
    const double dm = std::fabs(mass + absorbed - M0) / M0 / span;
    tr.mass_drift_rate = std::max(tr.mass_drift_rate, dm);
    double de = 0;
    if (check_energy_) {
      de = std::fabs(energy - E0) / std::max(std::fabs(E0), M0) / span;
      tr.energy_drift_rate = std::max(tr.energy_drift_rate, de);
    }
    if (dm > 10 * cfg_.mass_drift_tol || de > 10 * cfg_.energy_drift_tol) {
      std::ostringstream os;
      os << "conservation breach at t = " << t << ": mass drift rate " << dm << ", energy drift rate " << de;
      throw NumericalError(os.str());
    }
  }

 private:
  const EvolutionConfig& cfg_;
  bool check_energy_;
};

double weighted_mass(const Field& u) { return simd::weighted_norm2(u.data(), u.grid()->weights().data(), u.size()); }

}  // namespace

Trajectory evolve(const DeltaHamiltonian& H, const Field& u0, const EvolutionConfig& cfg, const ModelParams& prm,
                  const Observer& obs) {
  cfg.validate();
  prm.validate(true);
  if (cfg.scheme == Scheme::CrankNicolson) return crank_nicolson_oracle(H.grid(), H.q(), u0, cfg, prm, obs);
  if (!u0.grid()->same(*H.grid())) throw ConfigError("initial data grid does not match the operator grid");

  const double dt = cfg.time.dt;
  const long steps = cfg.time.steps();
  const int stride = cfg.time.stride;
  Trajectory tr;
  tr.scheme = scheme_name(cfg.scheme);
  tr.dt = dt;
  tr.stride = stride;
  const RVec& w = H.grid()->weights();
  const Absorber absorber(*H.grid(), cfg.absorber_width, cfg.absorber_strength, 0.5 * dt);
  DriftMonitor mon(cfg, absorber.idx.empty());
  double absorbed = 0;

  auto output = [&](double t, const Field& u) {
    mon.record(tr, t, u, weighted_mass(u), H.energy_form(u, prm), absorbed);
    if (cfg.keep_snapshots) tr.snapshots.push_back(u);
    if (obs) obs(t, u);
  };

  Field u = u0;
  output(0.0, u);
  if (cfg.scheme == Scheme::Picard) {
    // Chain Duhamel windows between output times.
    for (long m = 1; m * stride <= steps; ++m) {
      u = picard_lwp(H, u, stride * dt, prm, 1e-12, dt).u;
      output(m * stride * dt, u);
    }
    return tr;
  }

  const auto ph = H.phases(dt);
  const double c_half = 0.5 * dt * prm.mu;
  for (long n = 1; n <= steps; ++n) {
    simd::nonlinear_phase(u.data(), u.size(), c_half, prm.p);
    absorbed += absorber.apply(u, w);
    auto c = H.forward(u);
    H.apply_phases(c, ph);
    u = H.inverse(c);
    simd::nonlinear_phase(u.data(), u.size(), c_half, prm.p);
    absorbed += absorber.apply(u, w);
    if (n % stride == 0) output(n * dt, u);
  }
  return tr;
}

namespace {

// phi1(z) = (e^z - 1)/z, phi2(z) = (e^z - 1 - z)/z^2
void phi12(cplx z, cplx& p1, cplx& p2) {
  if (std::abs(z) < 1e-2) {
    cplx t1 = 0, t2 = 0, term = 1;
    for (int k = 0; k < 8; ++k) {
      // z^k/(k+1)! and z^k/(k+2)!
      t1 += term / double(k + 1);
      t2 += term / double((k + 1) * (k + 2));
      term *= z / double(k + 1);
    }
    p1 = t1;
    p2 = t2;
    return;
  }
  const cplx em1 = std::exp(z) - 1.0;
  p1 = em1 / z;
  p2 = (em1 - z) / (z * z);
}

struct ProductWeights {
  CVec decay_e, decay_o, wk_e, wk_o, wk1_e, wk1_o;
  cplx decay_a, wk_a, wk1_a;
};

ProductWeights product_weights(const DeltaHamiltonian& H, double h) {
  ProductWeights pw;
  auto fill = [&](const RVec& lam, CVec& d, CVec& a, CVec& b) {
    d.resize(lam.size());
    a.resize(lam.size());
    b.resize(lam.size());
    for (size_t n = 0; n < lam.size(); ++n) {
      const cplx z(0, -lam[n] * h);
      cplx p1, p2;
      phi12(z, p1, p2);
      d[n] = std::exp(z);
      a[n] = h * (p1 - p2);  // weight of F at the left node
      b[n] = h * p2;         // weight of F at the right node
    }
  };
  fill(H.even_lambda(), pw.decay_e, pw.wk_e, pw.wk1_e);
  fill(H.odd_lambda(), pw.decay_o, pw.wk_o, pw.wk1_o);
  pw.decay_a = pw.decay_e[0];
  pw.wk_a = pw.wk_e[0];
  pw.wk1_a = pw.wk1_e[0];
  return pw;
}

// One window of the (v, a) fixed point; returns false if the iteration stops contracting.
bool picard_window(const DeltaHamiltonian& H, const Field& u0, double t0, int K, double h, const ModelParams& prm,
                   double tol, PicardResult& out) {
  const ProductWeights pw = product_weights(H, h);
  const Field& phi = H.phi0_discrete();
  const SectorCoeffs c0 = H.forward(u0);
  const cplx a0 = c0.even[0];

  // Linear initial guess: v_k = e^{-i t_k H} P_c u0, a_k = e^{i q^2 t_k/2} a0.
  std::vector<SectorCoeffs> vc(K + 1);
  CVec a(K + 1);
  for (int k = 0; k <= K; ++k) {
    vc[k] = c0;
    vc[k].even[0] = 0;
    const auto ph = H.phases(k * h);
    H.apply_phases(vc[k], ph);
    a[k] = a0 * std::exp(cplx(0, 0.5 * H.q() * H.q() * k * h));
  }
  std::vector<Field> vx(K + 1);
  for (int k = 0; k <= K; ++k) vx[k] = H.inverse(vc[k]);

  double prev = INFINITY;
  for (int it = 1; it <= 200; ++it) {
    // Forcing F(v + a phi) at the nodes, split into continuum coefficients and the bound channel.
    std::vector<SectorCoeffs> Fc(K + 1);
    CVec Fa(K + 1);
    for (int k = 0; k <= K; ++k) {
      Field u = axpy(a[k], phi, vx[k]);
      Field F(u.grid());
      const int hp = prm.p / 2;
      for (int j = 0; j < u.size(); ++j) {
        double pw2 = 1;
        const double a2 = std::norm(u[j]);
        for (int l = 0; l < hp; ++l) pw2 *= a2;
        F[j] = prm.mu * pw2 * u[j];
      }
      Fc[k] = H.forward(F);
      Fa[k] = Fc[k].even[0];
      Fc[k].even[0] = 0;
    }
    std::vector<SectorCoeffs> nv(K + 1);
    CVec na(K + 1);
    nv[0] = c0;
    nv[0].even[0] = 0;
    na[0] = a0;
    const cplx mi(0, -1);
    for (int k = 0; k < K; ++k) {
      nv[k + 1] = nv[k];
      auto& e = nv[k + 1].even;
      auto& o = nv[k + 1].odd;
      for (size_t n = 1; n < e.size(); ++n)
        e[n] = pw.decay_e[n] * e[n] + mi * (pw.wk_e[n] * Fc[k].even[n] + pw.wk1_e[n] * Fc[k + 1].even[n]);
      for (size_t n = 0; n < o.size(); ++n)
        o[n] = pw.decay_o[n] * o[n] + mi * (pw.wk_o[n] * Fc[k].odd[n] + pw.wk1_o[n] * Fc[k + 1].odd[n]);
      na[k + 1] = pw.decay_a * na[k] + mi * (pw.wk_a * Fa[k] + pw.wk1_a * Fa[k + 1]);
    }
    double res = 0;
    for (int k = 0; k <= K; ++k) {
      Field nx = H.inverse(nv[k]);
      res = std::max(res, l2_norm(nx - vx[k]) + std::abs(na[k] - a[k]));
      vx[k] = std::move(nx);
    }
    vc = std::move(nv);
    a = std::move(na);
    out.iterations = it;
    out.residual = res;
    if (res < tol) break;
    if (!std::isfinite(res) || (it > 3 && res > 0.9 * prev)) return false;
    prev = res;
  }
  if (out.residual >= tol) return false;
  out.u = axpy(a[K], phi, vx[K]);
  for (int k = out.times.empty() ? 0 : 1; k <= K; ++k) {
    out.times.push_back(t0 + k * h);
    out.a.push_back(a[k]);
  }
  return true;
}

}  // namespace

PicardResult picard_lwp(const DeltaHamiltonian& H, const Field& u0, double T, const ModelParams& prm, double tol,
                        double node_dt) {
  prm.validate(true);
  if (!(T > 0) || !(node_dt > 0)) throw ConfigError("picard_lwp needs T > 0 and a positive node spacing");
  for (int halvings = 0; halvings <= 5; ++halvings) {
    const int windows = 1 << halvings;
    const double Tw = T / windows;
    const int K = std::max(1, static_cast<int>(std::ceil(Tw / node_dt - 1e-9)));
    const double h = Tw / K;
    PicardResult res;
    res.halvings = halvings;
    Field u = u0;
    bool ok = true;
    for (int w = 0; w < windows && ok; ++w) {
      PicardResult part;
      part.times = res.times;
      part.a = res.a;
      ok = picard_window(H, u, w * Tw, K, h, prm, tol, part);
      if (!ok) {
        res.residual = part.residual;
        break;
      }
      u = part.u;
      res.times = std::move(part.times);
      res.a = std::move(part.a);
      res.iterations = std::max(res.iterations, part.iterations);
      res.residual = std::max(res.residual, part.residual);
    }
    if (ok) {
      res.u = std::move(u);
      return res;
    }
    if (halvings == 5) {
      std::ostringstream os;
      os << "Picard iteration failed to contract after 5 halvings (final residual " << res.residual << ")";
      throw NumericalError(os.str());
    }
  }
  return {};
}

}  // namespace dnls
