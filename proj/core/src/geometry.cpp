#include "toruslab/geometry.hpp"

#include <cmath>
#include <sstream>

#include "toruslab/errors.hpp"

namespace toruslab {

void TorusParams::validate() const {
  std::ostringstream msg;
  if (!(std::isfinite(R) && std::isfinite(r) && std::isfinite(epsilon))) {
    msg << "non-finite torus parameters";
  } else if (!(r > 0.0)) {
    msg << "tube radius r must be positive (r=" << r << ")";
  } else if (n_waves < 1) {
    msg << "n_waves must be >= 1 (n_waves=" << n_waves << ")";
  } else if (!(r - std::abs(epsilon) > 0.0)) {
    msg << "r - |epsilon| must be positive (r=" << r << ", epsilon=" << epsilon << ")";
  } else if (!(R > r + std::abs(epsilon))) {
    msg << "embedding condition R > r + |epsilon| violated (R=" << R << ", r=" << r
        << ", epsilon=" << epsilon << ")";
  } else {
    return;
  }
  throw ValidationError(msg.str());
}

double tube_radius(const TorusParams& p, double theta) {
  return p.r + p.epsilon * std::sin(p.n_waves * theta);
}

double tube_radius_d1(const TorusParams& p, double theta) {
  return p.epsilon * p.n_waves * std::cos(p.n_waves * theta);
}

double tube_radius_d2(const TorusParams& p, double theta) {
  const double n = p.n_waves;
  return -p.epsilon * n * n * std::sin(n * theta);
}

MetricPoint metric_at(const TorusParams& p, double phi, double theta) {
  MetricPoint m;
  m.r_eps = tube_radius(p, theta);
  m.dr_eps = tube_radius_d1(p, theta);
  const double a = p.R + m.r_eps * std::cos(phi);
  m.Phi = p.epsilon == 0.0 ? a : std::sqrt(a * a + m.dr_eps * m.dr_eps);
  m.g11 = m.r_eps * m.r_eps;
  m.g22 = m.Phi * m.Phi;
  m.sqrt_det = m.r_eps * m.Phi;
  return m;
}

double Phi_dphi(const TorusParams& p, double phi, double theta) {
  const MetricPoint m = metric_at(p, phi, theta);
  const double a = p.R + m.r_eps * std::cos(phi);
  return -m.r_eps * std::sin(phi) * a / m.Phi;
}

double Phi_dtheta(const TorusParams& p, double phi, double theta) {
  const MetricPoint m = metric_at(p, phi, theta);
  const double a = p.R + m.r_eps * std::cos(phi);
  return (a * m.dr_eps * std::cos(phi) + m.dr_eps * tube_radius_d2(p, theta)) / m.Phi;
}

LaplaceCoefficients laplace_coefficients(const TorusParams& p, double phi, double theta) {
  const MetricPoint m = metric_at(p, phi, theta);
  const double Pp = Phi_dphi(p, phi, theta);
  const double Pt = Phi_dtheta(p, phi, theta);
  LaplaceCoefficients c;
  c.c_pp = 1.0 / m.g11;
  c.c_tt = 1.0 / m.g22;
  c.c_p = Pp / (m.g11 * m.Phi);
  c.c_t = (m.dr_eps * m.Phi - m.r_eps * Pt) / (m.r_eps * m.Phi * m.Phi * m.Phi);
  return c;
}

double gradient_norm_sq(double u_phi, double u_theta, const MetricPoint& mp) {
  return u_phi * u_phi / mp.g11 + u_theta * u_theta / mp.g22;
}

double stas_indicator(const TorusParams& p, double phi) {
  const double a = p.R + p.r * std::cos(phi);
  return -(p.r + p.R * std::cos(phi)) / (p.r * a * a);
}

SurfaceProfile SurfaceProfile::torus(double R, double r) {
  SurfaceProfile s;
  s.psi = [R, r](double rho) { return R + r * std::cos(rho / r); };
  s.chi = [r](double rho) { return r * std::sin(rho / r); };
  s.dpsi = [r](double rho) { return -std::sin(rho / r); };
  s.dchi = [r](double rho) { return std::cos(rho / r); };
  s.length_L = r * M_PI;
  return s;
}

}  // namespace toruslab
