#include <doctest.h>

#include <random>

#include "dnls/modulation.hpp"

using namespace dnls;

namespace {

const ModelParams kFocusing{-1, 4, -1};

struct Setup {
  GridPtr g;
  DeltaHamiltonian H;
  BoundStateSolver solver;
  explicit Setup(double L = 40, int N = 2048) : g(make_grid(L, N)), H(g, -1), solver(H, kFocusing) {}
};

Field bump(const GridPtr& g) {
  return sample(g, [](double x) { return std::exp(-(x - 1) * (x - 1)) * cplx(1, 0.5) + 0.3 * x * std::exp(-x * x); });
}

double inf_norm(const Eigen::Matrix2d& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace

TEST_CASE("extraction on exact bound states") {
  Setup s;
  const Field Q = s.solver.solve(0.1).Q;
  const Decomposition d = extract_z(s.solver, Q);
  CHECK(std::abs(d.z - 0.1) < 1e-10);
  CHECK(h1_norm(d.v) < 1e-9);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> th(0, 2 * M_PI);
  const Field u = Q + cplx(0.01) * bump(s.g);
  const Decomposition base = extract_z(s.solver, u);
  for (int i = 0; i < 4; ++i) {
    const cplx rot = std::exp(cplx(0, th(rng)));
    const Decomposition r = extract_z(s.solver, rot * u);
    CHECK(std::abs(r.z - rot * base.z) < 1e-10);
    CHECK(l2_norm(r.v - rot * base.v) < 1e-9);
    CHECK(r.orthogonality.cwiseAbs().maxCoeff() <= 1e-10);
  }
  CHECK(base.orthogonality.cwiseAbs().maxCoeff() <= 1e-10);
  MESSAGE("(||v||_H1 + |z|) / ||u||_H1 = " << base.size_ratio);
  CHECK(base.size_ratio < 2);

  const Decomposition p = extract_z(s.solver, cplx(0.05) * s.H.phi0_discrete());
  const double C = std::abs(p.z - 0.05) / (0.05 * 0.05);
  MESSAGE("|z - 0.05| / 0.05^2 = " << C);
  CHECK(C < 1);
}

TEST_CASE("remainder G") {
  Setup s(20, 512);
  const Field Q = s.solver.solve(0.1).Q;
  const Field v = cplx(0.05) * bump(s.g);
  CHECK(sup_norm(remainder_G(Field(s.g), Q, kFocusing)) == 0);
  CHECK(sup_norm(remainder_G(v, Field(s.g), kFocusing) - nonlinearity(v, kFocusing)) < 1e-15);
  for (int p : {4, 6, 8}) {
    const ModelParams prm{-1, p, -1.3};
    const Field G = remainder_G(v, Q, prm);
    const Field FQv = nonlinearity(Q + v, prm), FQ = nonlinearity(Q, prm);
    double worst = 0;
    for (int j = 0; j < s.g->N(); ++j) {
      const double q2 = std::norm(Q[j]);
      const cplx lin = (p + 2) / 2.0 * prm.mu * std::pow(q2, p / 2) * v[j] +
                       p / 2.0 * prm.mu * std::pow(q2, p / 2 - 1) * Q[j] * Q[j] * std::conj(v[j]);
      worst = std::max(worst, std::abs(FQv[j] - FQ[j] - lin - G[j]));
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("modulation ODE coefficients") {
  Setup s;
  const BoundState st = s.solver.solve(0.1);
  const ModulationODE o = ode_coefficients(extract_z(s.solver, st.Q), kFocusing);
  CHECK(o.b.cwiseAbs().maxCoeff() < 1e-12);
  Eigen::Matrix2d jk, kj;
  jk << 0, -1, 1, 0;
  kj << 0, 1, -1, 0;
  CHECK(inf_norm(o.A - kj) < 0.1);
  CHECK(inf_norm(o.jacobian - jk) < 0.1);
  CHECK(std::abs(o.A(0, 0)) < 1e-12);
  CHECK_FALSE(o.ill_conditioned);

  // small data: ||u||_H1 <= 0.01
  const Field u = s.solver.solve(0.005).Q + cplx(0.002) * bump(s.g);
  REQUIRE(h1_norm(u) <= 0.01);
  const ModulationODE small = ode_coefficients(extract_z(s.solver, u), kFocusing);
  CHECK(inf_norm(small.jacobian - jk) <= 0.1);
  CHECK(inf_norm(small.A - kj) <= 0.1);

  // b is quadratic in the radiation
  RVec amp, bn;
  for (double a : {1.0, 0.5, 0.25, 0.125}) {
    const Decomposition d = extract_z(s.solver, st.Q + cplx(0.02 * a) * bump(s.g), 0.1);
    amp.push_back(a);
    bn.push_back(ode_coefficients(d, kFocusing).b.norm());
  }
  for (size_t i = 1; i < amp.size(); ++i) {
    const double order = std::log(bn[i - 1] / bn[i]) / std::log(amp[i - 1] / amp[i]);
    MESSAGE("b scaling order " << order);
    CHECK(order >= 1.9);
  }

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  double worst = 0;
  for (int i = 0; i < 5; ++i) {
    const double c = n(rng), w = 0.5 + std::abs(n(rng));
    const cplx a(n(rng), n(rng));
    const Field shape = sample(s.g, [&](double x) { return a * std::exp(-(x - c) * (x - c) / w); });
    const Field v = cplx(0.02 / h1_norm(shape)) * shape;
    const ModulationODE m = ode_coefficients(extract_z(s.solver, st.Q + v, 0.1), kFocusing);
    worst = std::max(worst, m.A.inverse().cwiseAbs().maxCoeff());
  }
  MESSAGE("max |A^{-1}| entry " << worst);
  CHECK(worst <= 1.2);
}

TEST_CASE("tracking exact and rotated solitons") {
  Setup s(20, 1024);
  const BoundState st = s.solver.solve(0.1);
  EvolutionConfig c;
  c.time = TimeGrid(1e-3, 5, 100);
  const auto traj = evolve(s.H, st.Q, c, kFocusing);
  const ModulationTrajectory mt = track(s.solver, traj);
  REQUIRE_FALSE(mt.truncated);
  REQUIRE(mt.t.size() == traj.times.size());
  for (size_t m = 0; m < mt.t.size(); ++m) {
    CHECK(std::abs(std::abs(mt.z[m]) - 0.1) < 1e-6);
    CHECK(std::abs(mt.zeta[m] - 0.1) < 1e-6);
    CHECK(mt.orthogonality[m] <= 1e-10);
  }
  const ZAsymptotic za = z_asymptotic(mt);
  CHECK(std::abs(za.z_plus - 0.1) < 1e-6);
  CHECK(za.tail < 1e-6);
  CHECK(za.converged);

  const cplx rot = std::exp(cplx(0, 1.3));
  Trajectory rt = traj;
  for (auto& u : rt.snapshots) u = rot * u;
  const ModulationTrajectory mr = track(s.solver, rt);
  double dev = 0;
  for (size_t m = 0; m < mt.t.size(); ++m) dev = std::max(dev, std::abs(mr.z[m] - rot * mt.z[m]));
  CHECK(dev < 1e-10);
}

TEST_CASE("perturbed soliton: ODE consistency and phi0 coupling") {
  Setup s(40, 1024);
  const BoundState st = s.solver.solve(0.1);
  const Field g = bump(s.g);
  const Field u0 = st.Q + cplx(0.05 / h1_norm(g)) * g;
  EvolutionConfig c;
  c.time = TimeGrid(5e-3, 10, 10);
  c.absorber_width = 0.1;
  c.absorber_strength = 5;
  double coupling = 0;
  Tracker tr(s.solver, {}, [&](double, const Decomposition& d) {
    const double den = l2_norm(d.v) * std::abs(d.z);
    if (den > 0) coupling = std::max(coupling, std::abs(inner(s.H.phi0_discrete(), d.v)) / den);
  });
  evolve(s.H, u0, c, kFocusing, [&](double t, const Field& u) { tr.push(t, u); });
  const ModulationTrajectory mt = tr.finish();
  REQUIRE_FALSE(mt.truncated);
  double rmax = 0, bmax = 0;
  for (size_t m = 0; m < mt.t.size(); ++m) {
    rmax = std::max(rmax, mt.ode_residual[m]);
    bmax = std::max(bmax, std::abs(mt.rhs[m]));
  }
  MESSAGE("max r_m = " << rmax << ", max |A^{-1}b| = " << bmax << ", phi0 coupling C = " << coupling);
  CHECK(rmax <= 0.05 * bmax);
  CHECK(std::isfinite(coupling));
}
