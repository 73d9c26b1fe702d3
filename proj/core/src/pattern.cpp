#include "toruslab/pattern.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_spline.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "toruslab/errors.hpp"

namespace toruslab {

namespace {

const gsl_integration_glfixed_table* gl_table() {
  static const gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(10);
  return table;
}

template <class F>
double gauss_legendre(const F& fn, double a, double b) {
  if (a == b) return 0.0;
  gsl_function g;
  g.function = [](double x, void* ctx) { return (*static_cast<const F*>(ctx))(x); };
  g.params = const_cast<F*>(&fn);
  return gsl_integration_glfixed(&g, a, b, gl_table());
}

void silence_gsl() {
  static const bool once = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)once;
}

}  // namespace

double Profile::exponent(double c) const {
  const double d = c - std::cos(cfg_.phi0);
  return -cfg_.steepness * d * d + cfg_.skew * c * c * c;
}

double Profile::exponent_d1(double c) const {
  return -2.0 * cfg_.steepness * (c - std::cos(cfg_.phi0)) + 3.0 * cfg_.skew * c * c;
}

double Profile::weight(double s) const { return std::sin(s) * std::exp(exponent(std::cos(s))); }

double Profile::weight_d1(double s) const {
  const double c = std::cos(s), sn = std::sin(s);
  return std::exp(exponent(c)) * (c - sn * sn * exponent_d1(c));
}

double Profile::value(double phi) const {
  phi = std::clamp(phi, 0.0, M_PI);
  const int m = static_cast<int>(phi_.size()) - 1;
  const double dphi = M_PI / m;
  int i = std::min(static_cast<int>(phi / dphi), m - 1);
  if (phi == phi_[i]) return U_[i];
  if (phi >= M_PI) return U_[m];
  auto w = [this](double s) { return weight(s); };
  return U_[i] + cfg_.height * gauss_legendre(w, phi_[i], phi) / total_;
}

double Profile::d1(double phi) const {
  if (phi <= 0.0 || phi >= M_PI) return 0.0;
  return cfg_.height * weight(phi) / total_;
}

double Profile::d2(double phi) const {
  phi = std::clamp(phi, 0.0, M_PI);
  return cfg_.height * weight_d1(phi) / total_;
}

Profile build_profile(const ProfileConfig& cfg, const TorusParams& params) {
  params.validate();
  if (!(cfg.phi0 > 0.0 && cfg.phi0 < M_PI))
    throw ValidationError("phi0 must lie in (0, pi)");
  if (!(std::cos(cfg.phi0) < -params.r / params.R))
    throw ValidationError("stas violated: cos(phi0) must be < -r/R");
  if (!(cfg.steepness > 0.0)) throw ValidationError("steepness must be positive");
  if (!(cfg.height > 0.0)) throw ValidationError("height must be positive");
  if (!std::isfinite(cfg.skew)) throw ValidationError("skew must be finite");
  if (cfg.samples < 3 || cfg.samples % 2 == 0)
    throw ValidationError("profile samples must be odd and >= 3");

  Profile p;
  p.cfg_ = cfg;
  const int m = cfg.samples - 1;
  p.phi_.resize(cfg.samples);
  for (int i = 0; i <= m; ++i) p.phi_[i] = M_PI * i / m;
  p.phi_[m] = M_PI;

  auto w = [&p](double s) { return p.weight(s); };
  std::vector<double> cum(cfg.samples, 0.0);
  for (int i = 0; i < m; ++i) cum[i + 1] = cum[i] + gauss_legendre(w, p.phi_[i], p.phi_[i + 1]);
  p.total_ = cum[m];

  p.U_.resize(cfg.samples);
  p.U1_.resize(cfg.samples);
  p.U2_.resize(cfg.samples);
  for (int i = 0; i <= m; ++i) {
    p.U_[i] = cfg.height * cum[i] / p.total_;
    p.U1_[i] = p.d1(p.phi_[i]);
    p.U2_[i] = p.d2(p.phi_[i]);
  }
  p.U_[0] = 0.0;
  p.U_[m] = cfg.height;
  return p;
}

double ExtendedProfile::value(double phi) const {
  double x = std::fmod(phi, 2.0 * M_PI);
  if (x < 0.0) x += 2.0 * M_PI;
  return p_.value(x <= M_PI ? x : 2.0 * M_PI - x);
}

double ExtendedProfile::d1(double phi) const {
  double x = std::fmod(phi, 2.0 * M_PI);
  if (x < 0.0) x += 2.0 * M_PI;
  return x <= M_PI ? p_.d1(x) : -p_.d1(2.0 * M_PI - x);
}

double ExtendedProfile::d2(double phi) const {
  double x = std::fmod(phi, 2.0 * M_PI);
  if (x < 0.0) x += 2.0 * M_PI;
  return p_.d2(x <= M_PI ? x : 2.0 * M_PI - x);
}

std::vector<double> ExtendedProfile::sample(int n) const {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    // Mirror indices so that the sampled table is exactly even.
    const int k = std::min(i, n - i);
    out[i] = value(2.0 * M_PI * k / n);
  }
  return out;
}

ExtendedProfile extend_symmetric(const Profile& p) { return ExtendedProfile(p); }

struct Nonlinearity::Spline {
  gsl_spline* sp = nullptr;
  ~Spline() {
    if (sp) gsl_spline_free(sp);
  }
};

Nonlinearity::Nonlinearity(std::vector<double> s, std::vector<double> f)
    : s_(std::move(s)), f_(std::move(f)) {
  silence_gsl();
  if (s_.size() != f_.size() || s_.size() < 3)
    throw ValidationError("nonlinearity table needs >= 3 matching knots");
  for (size_t i = 1; i < s_.size(); ++i)
    if (!(s_[i] > s_[i - 1]))
      throw ValidationError("non-invertible profile: knots not strictly increasing");
  for (double v : f_)
    if (!std::isfinite(v)) throw ValidationError("non-finite nonlinearity value");

  auto sp = std::make_shared<Spline>();
  sp->sp = gsl_spline_alloc(gsl_interp_cspline, s_.size());
  if (gsl_spline_init(sp->sp, s_.data(), f_.data(), s_.size()) != GSL_SUCCESS)
    throw ValidationError("spline construction failed");
  spline_ = sp;

  fp_.resize(s_.size());
  for (size_t i = 0; i < s_.size(); ++i) {
    fp_[i] = gsl_spline_eval_deriv(spline_->sp, s_[i], nullptr);
    max_abs_fp_ = std::max(max_abs_fp_, std::abs(fp_[i]));
  }
  f_lo_ = f_.front();
  f_hi_ = f_.back();
  fp_lo_ = fp_.front();
  fp_hi_ = fp_.back();
  cumF_.assign(s_.size(), 0.0);
  for (size_t i = 1; i < s_.size(); ++i)
    cumF_[i] = cumF_[i - 1] + gsl_spline_eval_integ(spline_->sp, s_[i - 1], s_[i], nullptr);
  F_hi_ = cumF_.back();
}

double Nonlinearity::operator()(double s) const {
  if (s <= s_.front()) return f_lo_ + fp_lo_ * (s - s_.front());
  if (s >= s_.back()) return f_hi_ + fp_hi_ * (s - s_.back());
  return gsl_spline_eval(spline_->sp, s, nullptr);
}

double Nonlinearity::derivative(double s) const {
  if (s <= s_.front()) return fp_lo_;
  if (s >= s_.back()) return fp_hi_;
  return gsl_spline_eval_deriv(spline_->sp, s, nullptr);
}

double Nonlinearity::antiderivative(double s) const {
  // I(x) = integral from s_min to x, extended with the linear pieces.
  auto I = [this](double x) {
    if (x <= s_.front()) {
      const double d = x - s_.front();
      return f_lo_ * d + 0.5 * fp_lo_ * d * d;
    }
    if (x >= s_.back()) {
      const double d = x - s_.back();
      return F_hi_ + f_hi_ * d + 0.5 * fp_hi_ * d * d;
    }
    const size_t k = std::upper_bound(s_.begin(), s_.end(), x) - s_.begin() - 1;
    // Each spline piece is the cubic Hermite interpolant of (f, f') at its ends.
    const double h = s_[k + 1] - s_[k], t = (x - s_[k]) / h;
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
    return cumF_[k] + h * ((0.5 * t4 - t3 + t) * f_[k] + h * (0.25 * t4 - 2.0 * t3 / 3.0 + 0.5 * t2) * fp_[k] +
                           (t3 - 0.5 * t4) * f_[k + 1] + h * (0.25 * t4 - t3 / 3.0) * fp_[k + 1]);
  };
  return I(s) - I(0.0);
}

Nonlinearity forge_nonlinearity(const Profile& p, const TorusParams& params) {
  if (params.epsilon != 0.0) throw ValidationError("forge_nonlinearity requires epsilon = 0");
  const auto& phi = p.phi();
  std::vector<double> f(phi.size());
  for (size_t i = 0; i < phi.size(); ++i) {
    const double a = params.R + params.r * std::cos(phi[i]);
    f[i] = -p.U2()[i] / (params.r * params.r) + std::sin(phi[i]) / (params.r * a) * p.U1()[i];
  }
  return Nonlinearity(p.U(), std::move(f));
}

std::vector<double> profile_ode_residual(const Profile& p, const Nonlinearity& nl,
                                         const TorusParams& params) {
  const auto& phi = p.phi();
  std::vector<double> res(phi.size());
  for (size_t i = 0; i < phi.size(); ++i) {
    const double a = params.R + params.r * std::cos(phi[i]);
    res[i] = p.U2()[i] / (params.r * params.r) - std::sin(phi[i]) / (params.r * a) * p.U1()[i] +
             nl(p.U()[i]);
  }
  return res;
}

Threshold threshold_N(double max_abs_fprime, const TorusParams& params) {
  const double w = params.R + params.r;
  const double rhs = max_abs_fprime * w * w;
  Threshold t;
  t.bound = std::sqrt(max_abs_fprime) * w;
  long long N = std::max<long long>(1, static_cast<long long>(std::floor(t.bound)));
  while (static_cast<double>(N) * N <= rhs) ++N;
  while (N > 1 && static_cast<double>(N - 1) * (N - 1) > rhs) --N;
  t.N = static_cast<int>(N);
  return t;
}

Threshold threshold_N(const Nonlinearity& nl, const TorusParams& params) {
  return threshold_N(nl.max_abs_fprime(), params);
}

std::string profile_to_json(const Profile& p, const Nonlinearity& nl) {
  nlohmann::ordered_json j;
  j["format"] = "toruslab-profile";
  j["version"] = 1;
  j["phi0"] = p.config().phi0;
  j["steepness"] = p.config().steepness;
  j["skew"] = p.config().skew;
  j["height"] = p.config().height;
  j["samples"] = p.config().samples;
  j["max_abs_fprime"] = nl.max_abs_fprime();
  j["knots"] = {{"s", nl.s()}, {"f", nl.f()}, {"fprime", nl.fprime()}};
  j["profile"] = {{"phi", p.phi()}, {"U", p.U()}, {"U1", p.U1()}, {"U2", p.U2()}};
  return j.dump(1);
}

std::string nonlinearity_to_csv(const Nonlinearity& nl) {
  std::ostringstream os;
  os << std::setprecision(17) << "s,f,fprime\n";
  for (size_t i = 0; i < nl.s().size(); ++i)
    os << nl.s()[i] << ',' << nl.f()[i] << ',' << nl.fprime()[i] << '\n';
  return os.str();
}

Nonlinearity nonlinearity_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "s,f,fprime")
    throw ValidationError("nonlinearity CSV must start with header s,f,fprime");
  std::vector<double> s, f;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ','))
      throw ValidationError("malformed nonlinearity CSV row");
    s.push_back(std::stod(a));
    f.push_back(std::stod(b));
  }
  return Nonlinearity(std::move(s), std::move(f));
}

}  // namespace toruslab
