#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <random>

#include "dnls/bound_states.hpp"
#include "dnls/errors.hpp"

using namespace dnls;

namespace {

// Shooting oracle for the even bound state: -Q''/2 + mu Q^{p+1} = E Q on x > 0 with Q'(0+) = q Q(0).
// Overshooting amplitudes cross zero, undershooting ones turn back up; bisect between the two behaviours.
double shoot_Q0(double E, const ModelParams& prm, double lo, double hi) {
  using State = std::array<double, 2>;
  auto rhs = [&](const State& s, State& ds, double) {
    ds[0] = s[1];
    ds[1] = 2 * (prm.mu * std::pow(s[0], prm.p + 1) - E * s[0]);
  };
  auto crosses = [&](double a) {
    boost::numeric::odeint::runge_kutta4<State> stepper;
    State s{a, prm.q * a};
    const double h = 1e-4;
    for (double x = 0; x < 30; x += h) {
      stepper.do_step(rhs, s, x, h);
      if (s[0] < 0) return true;
      if (s[1] > 0) return false;
    }
    return false;
  };
  const bool lo_cross = crosses(lo);
  REQUIRE(lo_cross != crosses(hi));
  for (int i = 0; i < 50; ++i) {
    const double mid = 0.5 * (lo + hi);
    (crosses(mid) == lo_cross ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// M(E) = A int_0^1 ds / sqrt(beta - (beta - q^2) s^{p/2}), beta = -2E, from the first integral.
double mass_oracle(double E, const ModelParams& prm) {
  const double beta = -2 * E, p = prm.p, c = 4 * std::fabs(prm.mu) / (p + 2);
  const double A = std::pow((beta - prm.q * prm.q) / c, 2 / p);
  auto f = [&](double s) { return 1 / std::sqrt(beta - (beta - prm.q * prm.q) * std::pow(s, p / 2)); };
  return A * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0, 1, 15, 1e-14);
}

}  // namespace

TEST_CASE("closed-form profiles against a shooting oracle") {
  const ModelParams foc{-1, 4, -1}, defoc{-1, 4, 1};
  const double a = shoot_Q0(-1, foc, 0.5, 2.0);
  const double b = shoot_Q0(-0.25, defoc, 0.5, 1.5);
  CHECK(a == doctest::Approx(1.10668).epsilon(1e-5));
  CHECK(b == doctest::Approx(0.93060).epsilon(1e-5));
  CHECK(closed_form_value(-1, foc, 0) == doctest::Approx(a).epsilon(1e-7));
  CHECK(closed_form_value(-0.25, defoc, 0) == doctest::Approx(b).epsilon(1e-7));
  CHECK(closed_form_value(-0.5 - 1e-9, foc, 0) < 1e-2);
  CHECK(closed_form_value(-0.5 + 1e-9, defoc, 0) < 1e-2);
  for (int p : {6, 8}) {
    const ModelParams prm{-1.5, p, -2};
    CHECK(closed_form_value(-2, prm, 0) == doctest::Approx(shoot_Q0(-2, prm, 0.2, 3.0)).epsilon(1e-6));
  }
}

TEST_CASE("branch compatibility") {
  const ModelParams foc{-1, 4, -1}, defoc{-1, 4, 1};
  CHECK(classify_branch(-1, foc) == Branch::Focusing);
  CHECK(classify_branch(-0.25, defoc) == Branch::Defocusing);
  CHECK(classify_branch(0, defoc) == Branch::ZeroEnergy);
  CHECK_THROWS_AS(classify_branch(-0.25, foc), ConfigError);
  CHECK_THROWS_AS(classify_branch(-1, defoc), ConfigError);
  CHECK_THROWS_AS(classify_branch(0.1, defoc), ConfigError);
}

TEST_CASE("profile shape: even, positive, jump condition") {
  auto g = make_grid(40, 4096);
  const ModelParams prm{-1, 4, -1};
  const Field Q = closed_form_Q(-1, prm, g);
  const int o = g->origin();
  for (int j = 1; j < o; ++j) {
    CHECK(Q[o + j].real() == Q[o - j].real());
    CHECK(Q[o + j].real() > 0);
  }
  CHECK(std::abs(jump_defect(Q, prm.q)) <= 1e-4 * Q.at_origin().real());
}

TEST_CASE("small-amplitude family") {
  auto g = make_grid(40, 2048);
  DeltaHamiltonian H(g, -1);
  const ModelParams prm{-1, 4, -1};
  BoundStateSolver solver(H, prm);

  const BoundState s0 = solver.solve(0.0);
  CHECK(sup_norm(s0.Q) == 0);
  CHECK(s0.E == -0.5);

  const BoundState s1 = solver.solve(0.1);
  const double cE = std::abs(s1.E + 0.5) / 1e-4, ch = h1_norm(s1.h) / 1e-5;
  MESSAGE("E(0.1) + 1/2 = " << s1.E + 0.5 << ", ||h||_H1 = " << h1_norm(s1.h));
  CHECK(cE < 1);
  CHECK(ch < 1);
  CHECK(s1.elliptic_residual <= 10 * solver.options().tol);
  CHECK(std::abs(jump_defect(s1.Q, prm.q)) <= 1e-4 * s1.Q.at_origin().real());

  const BoundState s2 = solver.solve(0.05);
  CHECK(sup_norm(s2.Q - closed_form_Q(s2.E, prm, g)) < 1e-6);

  double worst = 0;
  for (double z : {0.02, 0.05, 0.1}) worst = std::max(worst, h1_norm(solver.solve(z).h) / (z * z));
  MESSAGE("max ||h||_H1 / |z|^2 = " << worst);
  CHECK(worst < 1e-2);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> r(0.01, 0.15), th(0, 2 * M_PI);
  for (int i = 0; i < 20; ++i) {
    const double a = r(rng), t = th(rng);
    const cplx rot = std::exp(cplx(0, t));
    const BoundState rs = solver.solve(a * rot);
    const BoundState base = solver.solve(a);
    CHECK(sup_norm(rs.Q - rot * base.Q) <= 1e-15 * sup_norm(base.Q));
    for (int j = 0; j < g->N(); ++j) REQUIRE(base.Q[j].imag() == 0);
  }
  CHECK_THROWS(solver.solve(0.5));
}

TEST_CASE("first and second derivatives") {
  auto g = make_grid(40, 2048);
  DeltaHamiltonian H(g, -1);
  const ModelParams prm{-1, 4, -1};
  BoundStateSolver solver(H, prm);
  const Field phi = H.phi0_discrete();
  const cplx I(0, 1);

  const BoundState st = solver.solve(0.1);
  const Field d1 = BoundStateSolver::DQ(st, 1.0), d2 = BoundStateSolver::DQ(st, I);
  CHECK(l2_norm(d1 - phi) < 0.1);
  CHECK(l2_norm(d2 - I * phi) < 0.1);
  const Field id = -I * BoundStateSolver::DQ(st, I * st.z);
  CHECK(l2_norm(st.Q - id) <= 1e-8);

  // DQ against forward differences of Q: first-order slope in epsilon.
  RVec eps{1e-2, 1e-3, 1e-4}, err;
  const cplx z(0.08, 0.03), w = std::exp(cplx(0, 0.7));
  const BoundState sz = solver.solve(z);
  const Field dq = BoundStateSolver::DQ(sz, w);
  for (double e : eps) err.push_back(l2_norm(cplx(1 / e) * (solver.solve(z + e * w).Q - sz.Q) - dq));
  for (size_t i = 1; i < eps.size(); ++i)
    CHECK(std::log(err[i - 1] / err[i]) / std::log(10.0) == doctest::Approx(1).epsilon(0.2));

  // D^2Q: symmetry and consistency with differences of DQ.
  const cplx w1 = std::exp(cplx(0, 0.3)), w2 = std::exp(cplx(0, 2.1));
  CHECK(l2_norm(solver.D2Q(sz, w1, w2) - solver.D2Q(sz, w2, w1)) < 1e-6);
  const Field d2q = solver.D2Q(sz, w1, w2);
  RVec err2;
  for (double e : {1e-2, 1e-3}) {
    const BoundState sp = solver.solve(z + e * w2);
    err2.push_back(l2_norm(cplx(1 / e) * (BoundStateSolver::DQ(sp, w1) - BoundStateSolver::DQ(sz, w1)) - d2q));
  }
  CHECK(std::log(err2[0] / err2[1]) / std::log(10.0) == doctest::Approx(1).epsilon(0.3));

  const BoundState zero = solver.solve(0.0);
  const auto all = solver.D2Q_all(zero);
  double bound = 0;
  for (const auto& row : all)
    for (const auto& f : row) bound = std::max(bound, l2_norm(f));
  MESSAGE("max ||D^2 Q[0]||_L2 = " << bound);
  CHECK(std::isfinite(bound));
  CHECK(bound < 1);
}

TEST_CASE("mass curve and stability threshold") {
  const ModelParams p4{-1, 4, -1};
  for (double E : {-0.6, -1.0, -3.0}) CHECK(closed_form_mass(E, p4) == doctest::Approx(mass_oracle(E, p4)).epsilon(1e-9));
  CHECK(closed_form_mass(-0.5 - 1e-10, p4) < 1e-3);
  // p = 4: M(E) = sqrt(3/2) arcsin(sqrt(1 - 1/(2|E|))), strictly decreasing in E; no threshold exists.
  CHECK(closed_form_mass(-1, p4) == doctest::Approx(std::sqrt(1.5) * std::asin(std::sqrt(0.5))).epsilon(1e-10));
  const E1Result r4 = find_E1(p4);
  CHECK_FALSE(r4.found);
  CHECK(r4.sign_changes == 0);

  // p = 6: a single sign change; locate it independently on the quadrature oracle.
  const ModelParams p6{-1, 6, -1};
  const E1Result r6 = find_E1(p6);
  REQUIRE(r6.found);
  CHECK(r6.sign_changes == 1);
  CHECK(r6.hi - r6.lo <= 1e-3);
  auto slope = [&](double E) { return mass_oracle(E + 1e-6, p6) - mass_oracle(E - 1e-6, p6); };
  double lo = -10, hi = -0.51;
  REQUIRE((slope(lo) > 0) != (slope(hi) > 0));
  const bool lo_sign = slope(lo) > 0;
  for (int i = 0; i < 40; ++i) {
    const double mid = 0.5 * (lo + hi);
    ((slope(mid) > 0) == lo_sign ? lo : hi) = mid;
  }
  MESSAGE("E1(p=6) = " << r6.E1 << ", oracle " << 0.5 * (lo + hi));
  CHECK(std::abs(r6.E1 - 0.5 * (lo + hi)) < 1e-3);

  const auto curve = mass_curve({-2.0, -1.0, -0.6}, p4);
  REQUIRE(curve.size() == 3);
  CHECK(curve[0].M > curve[1].M);
  CHECK(curve[1].M > curve[2].M);
}
