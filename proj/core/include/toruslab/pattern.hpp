#pragma once

#include <memory>
#include <string>
#include <vector>

#include "toruslab/geometry.hpp"

namespace toruslab {

// Weight w(s) = sin(s) exp(-steepness (cos s - cos phi0)^2 + skew cos^3 s).
struct ProfileConfig {
  double phi0 = 2.4;
  double steepness = 2.0;
  double skew = 1.5;
  double height = 1.0;
  int samples = 4097;
};

// Monotone generatrix U on [0, pi] with U(0) = 0, U(pi) = height.
class Profile {
 public:
  const ProfileConfig& config() const { return cfg_; }
  double height() const { return cfg_.height; }
  const std::vector<double>& phi() const { return phi_; }
  const std::vector<double>& U() const { return U_; }
  const std::vector<double>& U1() const { return U1_; }
  const std::vector<double>& U2() const { return U2_; }

  // Exact evaluation for phi in [0, pi].
  double value(double phi) const;
  double d1(double phi) const;
  double d2(double phi) const;

  double weight(double s) const;
  double weight_d1(double s) const;

 private:
  friend Profile build_profile(const ProfileConfig&, const TorusParams&);
  double exponent(double c) const;
  double exponent_d1(double c) const;

  ProfileConfig cfg_;
  double total_ = 1.0;
  std::vector<double> phi_, U_, U1_, U2_;
};

Profile build_profile(const ProfileConfig& cfg, const TorusParams& params);

// Even 2 pi-periodic extension of a profile: U(2 pi - phi) = U(phi).
class ExtendedProfile {
 public:
  explicit ExtendedProfile(Profile p) : p_(std::move(p)) {}
  const Profile& base() const { return p_; }
  double value(double phi) const;
  double d1(double phi) const;
  double d2(double phi) const;
  std::vector<double> sample(int n) const;

 private:
  Profile p_;
};

ExtendedProfile extend_symmetric(const Profile& p);

// Tabulated C1 nonlinearity, natural cubic spline in s with linear extension.
class Nonlinearity {
 public:
  Nonlinearity(std::vector<double> s, std::vector<double> f);

  double operator()(double s) const;
  double derivative(double s) const;
  // F(s) = integral of f from 0 to s.
  double antiderivative(double s) const;

  const std::vector<double>& s() const { return s_; }
  const std::vector<double>& f() const { return f_; }
  const std::vector<double>& fprime() const { return fp_; }
  double s_min() const { return s_.front(); }
  double s_max() const { return s_.back(); }
  double max_abs_fprime() const { return max_abs_fp_; }

 private:
  struct Spline;
  std::shared_ptr<const Spline> spline_;
  std::vector<double> s_, f_, fp_, cumF_;
  double max_abs_fp_ = 0.0;
  double f_lo_, f_hi_, fp_lo_, fp_hi_, F_hi_;
};

Nonlinearity forge_nonlinearity(const Profile& p, const TorusParams& params);

// Profile ODE residual (1/r^2) U'' - sin/(r(R + r cos)) U' + f(U) at each sample.
std::vector<double> profile_ode_residual(const Profile& p, const Nonlinearity& nl,
                                         const TorusParams& params);

struct Threshold {
  int N;
  double bound;
};

// Smallest N with N^2 > max|f'| (R + r)^2.
Threshold threshold_N(double max_abs_fprime, const TorusParams& params);
Threshold threshold_N(const Nonlinearity& nl, const TorusParams& params);

std::string profile_to_json(const Profile& p, const Nonlinearity& nl);
std::string nonlinearity_to_csv(const Nonlinearity& nl);
Nonlinearity nonlinearity_from_csv(const std::string& text);

}  // namespace toruslab
