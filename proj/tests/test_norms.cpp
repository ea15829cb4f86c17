#include <doctest.h>

#include "dnls/norms.hpp"

using namespace dnls;

namespace {

Field g_profile(const GridPtr& g) {
  return sample(g, [](double x) { return std::exp(-(x - 0.7) * (x - 0.7)) * cplx(1, -0.4); });
}

}  // namespace

TEST_CASE("X norm of zero and separable fields") {
  auto g = make_grid(20, 512);
  XNormAccumulator zero(0.01);
  for (int m = 0; m < 10; ++m) zero.add(Field(g));
  CHECK(zero.result().total() == 0);

  // v(t,x) = e^{-t} f(x): every mixed norm factors into a time integral times a spatial norm.
  const Field f = g_profile(g);
  const double dt = 1e-3, T = 2;
  const int n = static_cast<int>(std::lround(T / dt));
  XNormAccumulator acc(dt);
  for (int m = 0; m <= n; ++m) acc.add(cplx(std::exp(-m * dt)) * f);
  const XNorm x = acc.result();

  const Field fx = derivative(f);
  double wsup = 0, dsup = 0;
  for (int j = 0; j < g->N(); ++j) {
    wsup = std::max(wsup, std::abs(f[j]) * std::pow(japanese(g->x(j)), -1.5));
    dsup = std::max(dsup, std::abs(fx[j]));
  }
  const double t4 = std::pow((1 - std::exp(-4 * T)) / 4, 0.25), t2 = std::sqrt((1 - std::exp(-2 * T)) / 2);
  CHECK(x.linf_h1 == doctest::Approx(h1_norm(f)).epsilon(1e-14));
  CHECK(x.l4_linf == doctest::Approx(sup_norm(f) * t4).epsilon(1e-6));
  CHECK(x.weighted_lxinf_lt2 == doctest::Approx(wsup * t2).epsilon(1e-6));
  CHECK(x.deriv_lxinf_lt2 == doctest::Approx(dsup * t2).epsilon(1e-6));
}

TEST_CASE("X norm: nesting order and monotonicity") {
  auto g = make_grid(20, 512);
  const double dt = 0.01;
  // A bump moving across x: sup_x of the time integral differs from the time integral of sup_x.
  XNormAccumulator acc(dt);
  double lt2_lxinf = 0;
  XNorm prev;
  bool monotone = true;
  const int n = 400;
  for (int m = 0; m <= n; ++m) {
    const double c = -4 + 8.0 * m / n;
    const Field v = sample(g, [c](double x) { return std::exp(-4 * (x - c) * (x - c)); });
    acc.add(v);
    double s = 0;
    for (int j = 0; j < g->N(); ++j) s = std::max(s, std::abs(v[j]) * std::pow(japanese(g->x(j)), -1.5));
    lt2_lxinf += (m == 0 || m == n ? 0.5 : 1.0) * dt * s * s;
    if (m > 0) {
      const XNorm cur = acc.result();
      monotone = monotone && cur.linf_h1 >= prev.linf_h1 && cur.l4_linf >= prev.l4_linf &&
                 cur.weighted_lxinf_lt2 >= prev.weighted_lxinf_lt2 && cur.deriv_lxinf_lt2 >= prev.deriv_lxinf_lt2;
      prev = cur;
    } else {
      prev = acc.result();
    }
  }
  CHECK(monotone);
  const double lx_lt = acc.result().weighted_lxinf_lt2;
  MESSAGE("L_x^inf L_t^2 = " << lx_lt << ", L_t^2 L_x^inf = " << std::sqrt(lt2_lxinf));
  CHECK(lx_lt < 0.9 * std::sqrt(lt2_lxinf));

  const std::vector<Field> snaps(5, g_profile(g));
  CHECK(x_norm(snaps, 0.1).total() > 0);
}

TEST_CASE("Y norm") {
  ModulationTrajectory mt;
  for (int m = 0; m <= 100; ++m) {
    mt.t.push_back(0.1 * m);
    mt.rhs.push_back(0.0);
    mt.fd_rate.push_back(0.0);
  }
  CHECK(y_norm(mt).total() == 0);
  for (int m = 0; m <= 100; ++m) mt.rhs[m] = cplx(std::sin(0.3 * m), 0.2) * std::exp(-0.01 * m);
  const YNorm y = y_norm(mt);
  CHECK(y.l1 > 0);
  CHECK(y.l2 >= y.l1 / std::sqrt(mt.t.back()));
  mt.rhs.assign(mt.rhs.size(), cplx(0, 2));
  CHECK(y_norm(mt).l1 == doctest::Approx(20));
  CHECK(y_norm(mt).l2 == doctest::Approx(std::sqrt(40.0)));
}

TEST_CASE("Z and W norms") {
  auto g = make_grid(20, 512);
  ModulationTrajectory empty;
  CHECK(zw_norms(empty, *g).Z == 0);
  DeltaHamiltonian H(g, -1);
  BoundStateSolver solver(H, ModelParams{-1, 4, -1});
  ModulationTrajectory zero;
  zero.zw.add(solver.solve(0.0));
  CHECK(zw_norms(zero, *g).Z == 0);
  CHECK(zw_norms(zero, *g).W > 0);

  RVec ratio;
  for (double z : {0.02, 0.05, 0.1}) {
    ModulationTrajectory mt;
    mt.zw.add(solver.solve(z));
    const ZWNorms n = zw_norms(mt, *g);
    ratio.push_back(n.Z_over_zsup);
    CHECK(n.W > 0.5);
    CHECK(n.W < 50);
  }
  // Z is linear in |z| at leading order
  CHECK(ratio.front() == doctest::Approx(ratio.back()).epsilon(0.05));
}

TEST_CASE("scattering state") {
  auto g = make_grid(40, 1024);
  DeltaHamiltonian H(g, -1);
  RVec t;
  std::vector<Field> zero, lin;
  const Field u0 = H.project_pc(g_profile(g));
  for (int m = 0; m <= 10; ++m) {
    t.push_back(0.2 * m);
    zero.emplace_back(g);
    lin.push_back(H.propagate_linear(u0, t.back()));
  }
  CHECK(sup_norm(extract_scattering_state(H, t, zero).v_plus) == 0);
  const ScatteringState s = extract_scattering_state(H, t, lin);
  CHECK(l2_norm(s.v_plus - u0) < 1e-10);
  for (double c : s.cauchy_tail) CHECK(c < 1e-10);
}

TEST_CASE("rank correlation and log-log slope") {
  const RVec a{1, 2, 3, 4, 5}, b{10, 8, 7, 3, 1}, c{1, 4, 9, 16, 25};
  CHECK(spearman(a, b) == doctest::Approx(-1));
  CHECK(spearman(a, c) == doctest::Approx(1));
  CHECK(spearman(a, RVec{2, 1, 4, 3, 5}) == doctest::Approx(0.8));  // 1 - 6*4/(5*24)
  CHECK(loglog_slope(a, c) == doctest::Approx(2));
  CHECK(loglog_slope(RVec{0.02, 0.04, 0.08}, RVec{3e-4, 1.2e-3, 4.8e-3}) == doctest::Approx(2));
}

TEST_CASE("linear estimates on a reduced ensemble") {
  LinearCheckConfig c;
  c.dispersive_samples = 4;
  c.samples = 2;
  c.L = 150;
  c.N = 4096;
  c.t_max = 20;
  c.t_points = 8;
  c.smoothing_T = 5;
  c.smoothing_dt = 0.05;
  c.smoothing_L = 100;
  c.smoothing_N = 2048;
  c.refine = false;
  const LinearCheckReport r = check_linear_estimates(c);
  CHECK(r.trivial_lhs < 1e-10);
  REQUIRE_FALSE(r.checks.empty());
  for (const auto& ck : r.checks) {
    INFO(ck.name);
    CHECK(std::isfinite(ck.max_ratio));
    CHECK(ck.max_ratio > 0);
  }
  CHECK(r.checks.front().name == "dispersive");
  CHECK(std::isfinite(r.checks.front().fitted_exponent));
}
