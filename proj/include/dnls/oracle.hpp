#pragma once

#include "dnls/grid.hpp"

namespace dnls {

struct OracleOptions {
  double k_max = 0;        // 0: pi/(2.5 dx), where the y-rule still resolves the kernel
  double panel = 0.5;      // panel width in k away from the origin
  int graded_panels = 6;   // geometric panels on [0, panel]
  double tol = 1e-3;       // allowed quadrature error estimate
};

struct OracleResult {
  Field value;
  double error_estimate = 0;  // panel-bisection difference plus k-truncation tail bound
};

// Real-valued spectral density kernel int_0^inf e^{-itk^2/2} K(k;x,y) dk of e^{-itH} P_c,
// K = (1/pi)[cos k(x-y) - Re(q e^{ik(|x|+|y|)}/(q - ik))].
double spectral_kernel(double k, double x, double y, double q);

// Slow reference for e^{-itH} P_c f by direct k and y quadrature.
OracleResult spectral_quadrature_oracle(const Field& f, double t, double q, const OracleOptions& opt = {});

}  // namespace dnls
