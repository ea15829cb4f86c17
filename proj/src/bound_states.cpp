#include "dnls/bound_states.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <limits>

#include "dnls/errors.hpp"

namespace dnls {

Branch classify_branch(double E, const ModelParams& prm) {
  const double Eb = -0.5 * prm.q * prm.q;
  if (prm.mu < 0 && E < Eb) return Branch::Focusing;
  if (prm.mu > 0 && E > Eb && E < 0) return Branch::Defocusing;
  if (prm.mu > 0 && E == 0) return Branch::ZeroEnergy;
  throw ConfigError("no closed-form bound state for E = " + std::to_string(E) + " with mu = " + std::to_string(prm.mu) +
                    " (focusing needs mu < 0, E < -q^2/2; defocusing needs mu > 0, -q^2/2 < E <= 0)");
}

double closed_form_value(double E, const ModelParams& prm, double x) {
  const double p = prm.p, aq = std::fabs(prm.q), ax = std::fabs(x);
  switch (classify_branch(E, prm)) {
    case Branch::Focusing: {
      const double A = std::pow((p + 2) * std::fabs(E) / (2 * std::fabs(prm.mu)), 1 / p);
      const double arg = p * std::sqrt(std::fabs(E) / 2) * ax + std::atanh(aq / std::sqrt(2 * std::fabs(E)));
      // cosh^{-2/p} via exp to avoid overflow far out
      return A * std::exp(-2 / p * (arg + std::log1p(std::exp(-2 * arg)) - std::log(2.0)));
    }
    case Branch::Defocusing: {
      const double A = std::pow((p + 2) * std::fabs(E) / (2 * prm.mu), 1 / p);
      const double arg = p * std::sqrt(std::fabs(E) / 2) * ax + std::atanh(std::sqrt(2 * std::fabs(E)) / aq);
      return A * std::exp(-2 / p * (arg + std::log(-std::expm1(-2 * arg)) - std::log(2.0)));
    }
    case Branch::ZeroEnergy:
      return std::pow((p + 2) * aq * aq / (prm.mu * std::pow(p * aq * ax + 2, 2)), 1 / p);
  }
  return 0;
}

Field closed_form_Q(double E, const ModelParams& prm, const GridPtr& g) {
  classify_branch(E, prm);
  return sample(g, [&](double x) { return cplx(closed_form_value(E, prm, x)); });
}

double jump_defect(const Field& Q, double q) {
  const int o = Q.grid()->origin();
  const double h = Q.grid()->dx();
  auto one_sided = [&](int s) {
    return s * (-25.0 * Q[o].real() + 48.0 * Q[o + s].real() - 36.0 * Q[o + 2 * s].real() + 16.0 * Q[o + 3 * s].real() -
                3.0 * Q[o + 4 * s].real()) /
           (12 * h);
  };
  return one_sided(1) - one_sided(-1) - 2 * q * Q[o].real();
}

Field nonlinearity(const Field& u, const ModelParams& prm) {
  Field F(u.grid());
  const int hp = prm.p / 2;
  for (int j = 0; j < u.size(); ++j) {
    const double a2 = std::norm(u[j]);
    double pw = 1;
    for (int k = 0; k < hp; ++k) pw *= a2;
    F[j] = prm.mu * pw * u[j];
  }
  return F;
}

double elliptic_residual(const DeltaHamiltonian& H, const Field& Q, double E, const ModelParams& prm) {
  Field r = H.apply_H(Q) + nonlinearity(Q, prm);
  r -= cplx(E) * Q;
  return l2_norm(r);
}

BoundStateSolver::BoundStateSolver(const DeltaHamiltonian& H, ModelParams prm, BoundStateOptions opt)
    : H_(H), prm_(prm), opt_(opt), phi_(H.phi0_discrete()) {
  prm_.validate();
}

double BoundStateSolver::fd_step() const { return std::sqrt(opt_.tol); }

void BoundStateSolver::solve_fixed_point(Real& r) {
  const double s = r.s;
  const GridPtr& g = H_.grid();
  if (!r.h.grid()) r.h = Field(g);
  double prev = INFINITY, relax = 1.0;
  int growth = 0;
  for (int it = 1; it <= opt_.max_iter; ++it) {
    Field Q = axpy(s, phi_, r.h);
    const Field F = nonlinearity(Q, prm_);
    const double e_new = inner(phi_, F).real() / s;
    Field rhs = axpy(e_new, r.h, -1.0 * F);
    Field h_new = H_.shifted_resolvent_pc(rhs);
    for (auto& v : h_new.values()) v = cplx(v.real(), 0.0);
    const double res = std::fabs(e_new - r.e) + l2_norm(h_new - r.h);
    if (relax < 1.0) {
      r.e = r.e + relax * (e_new - r.e);
      r.h = axpy(relax, h_new - r.h, r.h);
    } else {
      r.e = e_new;
      r.h = std::move(h_new);
    }
    r.iterations = it;
    r.residual = res;
    if (res < opt_.tol) return;
    if (res > prev) {
      relax = 0.5;
      if (++growth >= 5) throw NumericalError("bound-state fixed point is not contracting at |z| = " + std::to_string(s));
    } else {
      growth = 0;
    }
    prev = res;
  }
  throw NumericalError("bound-state fixed point did not converge at |z| = " + std::to_string(s));
}

void BoundStateSolver::solve_derivative(Real& r, cplx w, Field& Dh, double& De) {
  const double s = r.s;
  const GridPtr& g = H_.grid();
  const Field Q = axpy(s, phi_, r.h);
  const Field F = nonlinearity(Q, prm_);
  const cplx phiF = inner(phi_, F);
  RVec a(g->N()), b2(g->N());
  const int hp = prm_.p / 2;
  for (int j = 0; j < g->N(); ++j) {
    const double q2 = std::norm(Q[j]);
    double pw = 1;
    for (int k = 0; k < hp - 1; ++k) pw *= q2;
    a[j] = prm_.mu * 0.5 * (prm_.p + 2) * pw * q2;
    b2[j] = prm_.mu * 0.5 * prm_.p * pw;
  }
  if (!Dh.grid()) Dh = Field(g);
  double prev = INFINITY;
  int growth = 0;
  for (int it = 1; it <= opt_.max_iter; ++it) {
    const Field DQ = axpy(w, phi_, Dh);
    Field DF(g);
    for (int j = 0; j < g->N(); ++j) DF[j] = a[j] * DQ[j] + b2[j] * Q[j] * Q[j] * std::conj(DQ[j]);
    const double De_new = (-w / (s * s) * phiF + inner(phi_, DF) / s).real();
    Field rhs = axpy(De_new, r.h, axpy(r.e, Dh, -1.0 * DF));
    Field Dh_new = H_.shifted_resolvent_pc(rhs);
    const double res = std::fabs(De_new - De) + l2_norm(Dh_new - Dh);
    De = De_new;
    Dh = std::move(Dh_new);
    if (res < opt_.tol) return;
    if (res > prev && ++growth >= 5) throw NumericalError("derivative system is not contracting");
    prev = res;
  }
  throw NumericalError("derivative system did not converge at |z| = " + std::to_string(s));
}

const BoundStateSolver::Real& BoundStateSolver::real_profile(double s) {
  if (s == cache_.s) return cache_;
  // Warm start from whichever cached profile is closer.
  Real r = std::fabs(last_.s - s) < std::fabs(cache_.s - s) ? last_ : cache_;
  if (r.s < 0) r = Real{};
  r.s = s;
  solve_fixed_point(r);
  solve_derivative(r, cplx(1, 0), r.D1h, r.De1);
  solve_derivative(r, cplx(0, 1), r.D2h, r.De2);
  last_ = std::move(cache_);
  cache_ = std::move(r);
  return cache_;
}

BoundState BoundStateSolver::solve(cplx z) {
  const double s = std::abs(z);
  if (s > opt_.z_max)
    throw NumericalError("|z| = " + std::to_string(s) + " exceeds the contraction radius " + std::to_string(opt_.z_max));
  const GridPtr& g = H_.grid();
  BoundState st;
  st.z = z;
  if (s == 0) {
    st.E = H_.bound_energy();
    st.Q = Field(g);
    st.h = Field(g);
    st.D1Q = phi_;
    st.D2Q = cplx(0, 1) * phi_;
    return st;
  }
  const Real& r = real_profile(s);
  const cplx rot = z / s;
  st.E = H_.bound_energy() + r.e;
  st.h = rot * r.h;
  st.Q = axpy(z, phi_, st.h);
  const Field D1 = axpy(1.0, phi_, r.D1h);
  const Field D2 = axpy(cplx(0, 1), phi_, r.D2h);
  // D_j Q[z] = rot * D_{w'} Q[s], w' = conj(rot) e_j
  const cplx w1 = std::conj(rot), w2 = std::conj(rot) * cplx(0, 1);
  st.D1Q = rot * axpy(w1.imag(), D2, w1.real() * D1);
  st.D2Q = rot * axpy(w2.imag(), D2, w2.real() * D1);
  st.De[0] = w1.real() * r.De1 + w1.imag() * r.De2;
  st.De[1] = w2.real() * r.De1 + w2.imag() * r.De2;
  st.iterations = r.iterations;
  st.update_residual = r.residual;
  st.elliptic_residual = elliptic_residual(H_, st.Q, st.E, prm_);
  return st;
}

Field BoundStateSolver::DQ(const BoundState& st, cplx w) { return axpy(w.imag(), st.D2Q, w.real() * st.D1Q); }

Field BoundStateSolver::D2Q(const BoundState& st, cplx w1, cplx w2) {
  const double eps = fd_step() * std::max(1.0, std::abs(st.z));
  const BoundState a = solve(st.z + eps * w2);
  const BoundState b = solve(st.z - eps * w2);
  Field d = DQ(a, w1) - DQ(b, w1);
  d *= 1.0 / (2 * eps);
  return d;
}

std::array<std::array<Field, 2>, 2> BoundStateSolver::D2Q_all(const BoundState& st) {
  const double eps = fd_step() * std::max(1.0, std::abs(st.z));
  std::array<std::array<Field, 2>, 2> out;
  const cplx dir[2] = {cplx(1, 0), cplx(0, 1)};
  for (int k = 0; k < 2; ++k) {
    const BoundState a = solve(st.z + eps * dir[k]);
    const BoundState b = solve(st.z - eps * dir[k]);
    for (int j = 0; j < 2; ++j) {
      Field d = DQ(a, dir[j]) - DQ(b, dir[j]);
      d *= 1.0 / (2 * eps);
      out[j][k] = std::move(d);
    }
  }
  return out;
}

double closed_form_mass(double E, const ModelParams& prm) {
  boost::math::quadrature::exp_sinh<double> integrator;
  auto f = [&](double x) {
    const double v = closed_form_value(E, prm, x);
    return v * v;
  };
  return 2 * integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

std::vector<MassCurvePoint> mass_curve(const std::vector<double>& Es, const ModelParams& prm) {
  std::vector<MassCurvePoint> out;
  for (double E : Es) {
    if (classify_branch(E, prm) != Branch::Focusing)
      throw ConfigError("mass curve is defined on the focusing branch E < -q^2/2");
    out.push_back({E, closed_form_mass(E, prm)});
  }
  return out;
}

E1Result find_E1(const ModelParams& prm, double E_min, int samples, double bracket) {
  E1Result res;
  const double Eb = -0.5 * prm.q * prm.q;
  if (prm.mu >= 0) {
    res.diagnostic = "threshold requires the focusing branch (mu < 0)";
    return res;
  }
  auto dM = [&](double E) {
    const double d = 1e-5 * std::fabs(E);
    return (closed_form_mass(E + d, prm) - closed_form_mass(E - d, prm)) / (2 * d);
  };
  // Scan in log-distance from the linear eigenvalue.
  const double lo = std::log(1e-4 * std::fabs(Eb)), hi = std::log(Eb - E_min);
  std::vector<double> Es(samples), ds(samples);
  for (int i = 0; i < samples; ++i) {
    Es[i] = Eb - std::exp(lo + (hi - lo) * i / (samples - 1));
    ds[i] = dM(Es[i]);
  }
  int first = -1;
  for (int i = 1; i < samples; ++i)
    if ((ds[i] > 0) != (ds[i - 1] > 0)) {
      ++res.sign_changes;
      if (first < 0) first = i;
    }
  if (first < 0) {
    res.diagnostic = "threshold outside range: dM/dE keeps sign " + std::string(ds[0] > 0 ? "+" : "-") +
                     " on [" + std::to_string(E_min) + ", " + std::to_string(Eb) + ")";
    return res;
  }
  double a = Es[first], b = Es[first - 1];  // a < b
  const bool sa = dM(a) > 0;
  while (b - a > bracket) {
    const double m = 0.5 * (a + b);
    if ((dM(m) > 0) == sa)
      a = m;
    else
      b = m;
  }
  res.found = true;
  res.lo = a;
  res.hi = b;
  res.E1 = 0.5 * (a + b);
  res.diagnostic = "sign change of dM/dE bracketed";
  return res;
}

}  // namespace dnls
