#include "dnls/oracle.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "dnls/errors.hpp"

namespace dnls {

double spectral_kernel(double k, double x, double y, double q) {
  const cplx g = q / cplx(q, -k);
  const double a = k * (std::fabs(x) + std::fabs(y));
  return (std::cos(k * (x - y)) - (g.real() * std::cos(a) - g.imag() * std::sin(a))) / M_PI;
}

namespace {

using GL = boost::math::quadrature::gauss<double, 20>;

// Panel endpoints: geometric grading on [0, panel], uniform beyond.
std::vector<double> panel_edges(double kmax, const OracleOptions& opt, int refine) {
  std::vector<double> e{0.0};
  const double first = std::min(opt.panel, kmax);
  for (int i = opt.graded_panels; i >= 0; --i) e.push_back(first * std::pow(0.5, i));
  const int n = static_cast<int>(std::ceil((kmax - first) / opt.panel - 1e-12));
  for (int i = 1; i <= n; ++i) e.push_back(std::min(kmax, first + i * opt.panel));
  std::vector<double> out{e[0]};
  for (size_t i = 1; i < e.size(); ++i) {
    const double a = e[i - 1], b = e[i];
    for (int s = 1; s <= refine; ++s) out.push_back(a + (b - a) * s / refine);
  }
  return out;
}

Field integrate_k(const Field& f, double t, double q, const std::vector<double>& edges) {
  const auto& g = *f.grid();
  const int N = g.N();
  const auto& w = g.weights();
  CVec acc(N, 0.0);
  const auto& xs = GL::abscissa();
  const auto& ws = GL::weights();
  auto node = [&](double k, double wk) {
    cplx Fc = 0, Fs = 0, Gc = 0, Gs = 0;
    for (int j = 0; j < N; ++j) {
      const double y = g.x(j), wy = w[j] * 1.0;
      const cplx fy = wy * f[j];
      Fc += std::cos(k * y) * fy;
      Fs += std::sin(k * y) * fy;
      Gc += std::cos(k * std::fabs(y)) * fy;
      Gs += std::sin(k * std::fabs(y)) * fy;
    }
    const cplx gk = q / cplx(q, -k);
    const cplx ph = std::polar(wk / M_PI, -0.5 * t * k * k);
    for (int j = 0; j < N; ++j) {
      const double x = g.x(j), ax = std::fabs(x);
      const double cx = std::cos(k * x), sx = std::sin(k * x), ca = std::cos(k * ax), sa = std::sin(k * ax);
      const cplx free = cx * Fc + sx * Fs;
      const cplx cc = ca * Gc - sa * Gs, ss = sa * Gc + ca * Gs;
      acc[j] += ph * (free - (gk.real() * cc - gk.imag() * ss));
    }
  };
  for (size_t i = 1; i < edges.size(); ++i) {
    const double a = edges[i - 1], b = edges[i], c = 0.5 * (a + b), r = 0.5 * (b - a);
    for (size_t n = 0; n < xs.size(); ++n) {
      if (xs[n] == 0) {
        node(c, r * ws[n]);
      } else {
        node(c - r * xs[n], r * ws[n]);
        node(c + r * xs[n], r * ws[n]);
      }
    }
  }
  return Field(f.grid(), std::move(acc));
}

}  // namespace

OracleResult spectral_quadrature_oracle(const Field& f, double t, double q, const OracleOptions& opt) {
  const auto& g = *f.grid();
  if (g.N() > 512) throw ConfigError("spectral quadrature oracle is limited to N <= 512");
  if (!(q < 0)) throw ConfigError("q must be negative");
  const double kmax = opt.k_max > 0 ? opt.k_max : M_PI / (2.5 * g.dx());
  OracleResult r;
  r.value = integrate_k(f, t, q, panel_edges(kmax, opt, 1));
  const Field fine = integrate_k(f, t, q, panel_edges(kmax, opt, 2));
  // Truncation: the k-integrand decays like 2|q||f(0)|/(pi k^2), oscillating as e^{-itk^2/2}.
  const double f0 = std::abs(f.at_origin());
  const double tail = 2 * std::fabs(q) * f0 / M_PI * std::min(1.0 / kmax, t > 0 ? 1.0 / (t * kmax * kmax * kmax) : 1.0);
  r.error_estimate = sup_norm(fine - r.value) + tail;
  r.value = fine;
  if (r.error_estimate > opt.tol)
    throw NumericalError("oracle quadrature error estimate " + std::to_string(r.error_estimate) + " exceeds budget");
  return r;
}

}  // namespace dnls
