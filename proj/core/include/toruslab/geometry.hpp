#pragma once

#include <functional>

namespace toruslab {

struct TorusParams {
  double R = 5.0;
  double r = 1.0;
  double epsilon = 0.0;
  int n_waves = 1;

  // Throws ValidationError unless R > r + |epsilon| > 0, r > 0, n_waves >= 1.
  void validate() const;
  TorusParams with_epsilon(double eps) const {
    TorusParams p = *this;
    p.epsilon = eps;
    return p;
  }
};

struct MetricPoint {
  double g11;
  double g22;
  double sqrt_det;
  double Phi;
  double r_eps;
  double dr_eps;
};

struct LaplaceCoefficients {
  double c_pp;
  double c_tt;
  double c_p;
  double c_t;
};

// r_eps(theta) = r + eps sin(n theta) and its first two derivatives.
double tube_radius(const TorusParams& p, double theta);
double tube_radius_d1(const TorusParams& p, double theta);
double tube_radius_d2(const TorusParams& p, double theta);

MetricPoint metric_at(const TorusParams& p, double phi, double theta);

// Partial derivatives of Phi in closed form.
double Phi_dphi(const TorusParams& p, double phi, double theta);
double Phi_dtheta(const TorusParams& p, double phi, double theta);

// Coefficients of u_pp, u_tt, u_p, u_t in the Laplace-Beltrami operator.
LaplaceCoefficients laplace_coefficients(const TorusParams& p, double phi, double theta);

// |grad u|^2 = u_phi^2 / r_eps^2 + u_theta^2 / Phi^2.
double gradient_norm_sq(double u_phi, double u_theta, const MetricPoint& mp);

// (psi'/psi)' of the standard torus generatrix, as a function of phi.
double stas_indicator(const TorusParams& p, double phi);

// Generatrix of a surface of revolution in arc length rho in [0, L].
struct SurfaceProfile {
  std::function<double(double)> psi;
  std::function<double(double)> chi;
  std::function<double(double)> dpsi;
  std::function<double(double)> dchi;
  double length_L = 0.0;

  // Standard torus: rho = r phi, psi = R + r cos(rho/r), chi = r sin(rho/r).
  static SurfaceProfile torus(double R, double r);
};

}  // namespace toruslab
