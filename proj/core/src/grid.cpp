#include "toruslab/grid.hpp"

#include <cstdint>
#include <cstring>
#include <iomanip>
#include <sstream>
#include <vector>

#include "toruslab/errors.hpp"

namespace toruslab {

void PeriodicGrid::validate() const {
  if (n_phi < 16 || n_theta < 16 || n_phi % 2 || n_theta % 2)
    throw ValidationError("grid sizes must be even and >= 16 (got " + std::to_string(n_phi) +
                          "x" + std::to_string(n_theta) + ")");
}

void PeriodicGrid::validate_for(const TorusParams& p) const {
  validate();
  if (n_theta % (4 * p.n_waves))
    throw ValidationError("n_theta=" + std::to_string(n_theta) + " must be divisible by 4*n=" +
                          std::to_string(4 * p.n_waves));
}

Eigen::VectorXd area_weights(const TorusParams& params, const PeriodicGrid& grid) {
  Eigen::VectorXd w(grid.size());
  for (int i = 0; i < grid.n_phi; ++i)
    for (int j = 0; j < grid.n_theta; ++j)
      w[grid.index(i, j)] = metric_at(params, grid.phi(i), grid.theta(j)).sqrt_det;
  return w;
}

DiscreteOperator assemble_laplacian(const TorusParams& params, const PeriodicGrid& grid) {
  params.validate();
  grid.validate();
  const int np = grid.n_phi, nt = grid.n_theta;
  const double hp2 = grid.h_phi() * grid.h_phi(), ht2 = grid.h_theta() * grid.h_theta();

  // a = sqrt(g) g^11 at (i+1/2, j); b = sqrt(g) g^22 at (i, j+1/2).
  std::vector<double> a(grid.size()), b(grid.size());
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < nt; ++j) {
      const MetricPoint mp = metric_at(params, grid.phi(i) + 0.5 * grid.h_phi(), grid.theta(j));
      a[grid.index(i, j)] = mp.Phi / mp.r_eps;
      const MetricPoint mt = metric_at(params, grid.phi(i), grid.theta(j) + 0.5 * grid.h_theta());
      b[grid.index(i, j)] = mt.r_eps / mt.Phi;
    }

  DiscreteOperator op;
  op.params = params;
  op.grid = grid;
  op.weights = area_weights(params, grid);

  std::vector<Eigen::Triplet<double>> ts;
  ts.reserve(5 * grid.size());
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < nt; ++j) {
      const int k = grid.index(i, j);
      const double ap = a[k] / hp2, am = a[grid.index(i - 1, j)] / hp2;
      const double bp = b[k] / ht2, bm = b[grid.index(i, j - 1)] / ht2;
      ts.emplace_back(k, grid.index(i + 1, j), ap);
      ts.emplace_back(k, grid.index(i - 1, j), am);
      ts.emplace_back(k, grid.index(i, j + 1), bp);
      ts.emplace_back(k, grid.index(i, j - 1), bm);
      ts.emplace_back(k, k, -(ap + am + bp + bm));
    }
  op.S.resize(grid.size(), grid.size());
  op.S.setFromTriplets(ts.begin(), ts.end());
  for (auto& t : ts) t = Eigen::Triplet<double>(t.row(), t.col(), t.value() / op.weights[t.row()]);
  op.L.resize(grid.size(), grid.size());
  op.L.setFromTriplets(ts.begin(), ts.end());
  return op;
}

DiscreteOperator assemble_laplacian_direct(const TorusParams& params, const PeriodicGrid& grid) {
  params.validate();
  grid.validate();
  const double hp = grid.h_phi(), ht = grid.h_theta();
  DiscreteOperator op;
  op.params = params;
  op.grid = grid;
  op.flux_form = false;
  op.weights = area_weights(params, grid);
  std::vector<Eigen::Triplet<double>> ts;
  ts.reserve(5 * grid.size());
  for (int i = 0; i < grid.n_phi; ++i)
    for (int j = 0; j < grid.n_theta; ++j) {
      const int k = grid.index(i, j);
      const LaplaceCoefficients c = laplace_coefficients(params, grid.phi(i), grid.theta(j));
      const double pp = c.c_pp / (hp * hp), tt = c.c_tt / (ht * ht);
      const double p1 = c.c_p / (2.0 * hp), t1 = c.c_t / (2.0 * ht);
      ts.emplace_back(k, grid.index(i + 1, j), pp + p1);
      ts.emplace_back(k, grid.index(i - 1, j), pp - p1);
      ts.emplace_back(k, grid.index(i, j + 1), tt + t1);
      ts.emplace_back(k, grid.index(i, j - 1), tt - t1);
      ts.emplace_back(k, k, -2.0 * (pp + tt));
    }
  op.L.resize(grid.size(), grid.size());
  op.L.setFromTriplets(ts.begin(), ts.end());
  return op;
}

double quadrature(const ScalarField& f, const TorusParams& params, const PeriodicGrid& grid) {
  const Eigen::VectorXd w = area_weights(params, grid);
  double sum = 0.0;
  for (int k = 0; k < grid.size(); ++k) sum += f.values[k] * w[k];
  return sum * grid.h_phi() * grid.h_theta();
}

double weighted_inner_product(const ScalarField& f, const ScalarField& g,
                              const TorusParams& params, const PeriodicGrid& grid) {
  ScalarField fg(grid, f.values.cwiseProduct(g.values));
  return quadrature(fg, params, grid);
}

double dirichlet_integral(const ScalarField& u, const TorusParams& params,
                          const PeriodicGrid& grid) {
  const double hp = grid.h_phi(), ht = grid.h_theta();
  double sum = 0.0;
  for (int i = 0; i < grid.n_phi; ++i)
    for (int j = 0; j < grid.n_theta; ++j) {
      const double up = (u(grid.wrap_phi(i + 1), j) - u(i, j)) / hp;
      const MetricPoint mp = metric_at(params, grid.phi(i) + 0.5 * hp, grid.theta(j));
      sum += gradient_norm_sq(up, 0.0, mp) * mp.sqrt_det;
      const double ut = (u(i, grid.wrap_theta(j + 1)) - u(i, j)) / ht;
      const MetricPoint mt = metric_at(params, grid.phi(i), grid.theta(j) + 0.5 * ht);
      sum += gradient_norm_sq(0.0, ut, mt) * mt.sqrt_det;
    }
  return sum * hp * ht;
}

ScalarField gradient_norm_sq_field(const ScalarField& u, const TorusParams& params,
                                   const PeriodicGrid& grid) {
  ScalarField out(grid);
  const double hp = grid.h_phi(), ht = grid.h_theta();
  for (int i = 0; i < grid.n_phi; ++i)
    for (int j = 0; j < grid.n_theta; ++j) {
      const double up = (u(grid.wrap_phi(i + 1), j) - u(grid.wrap_phi(i - 1), j)) / (2.0 * hp);
      const double ut =
          (u(i, grid.wrap_theta(j + 1)) - u(i, grid.wrap_theta(j - 1))) / (2.0 * ht);
      out(i, j) = gradient_norm_sq(up, ut, metric_at(params, grid.phi(i), grid.theta(j)));
    }
  return out;
}

std::string field_to_csv(const ScalarField& u) {
  const PeriodicGrid g = u.grid();
  std::ostringstream os;
  os << std::setprecision(17) << "phi,theta,value\n";
  for (int i = 0; i < g.n_phi; ++i)
    for (int j = 0; j < g.n_theta; ++j)
      os << g.phi(i) << ',' << g.theta(j) << ',' << u(i, j) << '\n';
  return os.str();
}

ScalarField field_from_csv(const std::string& text, const PeriodicGrid& grid) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "phi,theta,value")
    throw ValidationError("field CSV must start with header phi,theta,value");
  ScalarField u(grid);
  int k = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto pos = line.rfind(',');
    if (pos == std::string::npos || k >= grid.size())
      throw ValidationError("malformed field CSV");
    u.values[k++] = std::stod(line.substr(pos + 1));
  }
  if (k != grid.size()) throw ValidationError("field CSV row count does not match grid");
  return u;
}

namespace {

void put_u32(std::string& s, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) s.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

std::uint32_t get_u32(const std::string& s, size_t off) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[off + b])) << (8 * b);
  return v;
}

}  // namespace

// Layout: "TPF1", u32 n_phi, u32 n_theta, 4 reserved zero bytes, then
// n_phi * n_theta little-endian float64 values, phi-major.
std::string field_to_binary(const ScalarField& u) {
  std::string out = "TPF1";
  put_u32(out, static_cast<std::uint32_t>(u.n_phi));
  put_u32(out, static_cast<std::uint32_t>(u.n_theta));
  put_u32(out, 0);
  out.reserve(16 + 8 * u.values.size());
  for (Eigen::Index k = 0; k < u.values.size(); ++k) {
    std::uint64_t bits;
    const double v = u.values[k];
    std::memcpy(&bits, &v, 8);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
  }
  return out;
}

ScalarField field_from_binary(const std::string& bytes) {
  if (bytes.size() < 16 || bytes.compare(0, 4, "TPF1") != 0)
    throw ValidationError("not a TPF1 field block");
  const PeriodicGrid g{static_cast<int>(get_u32(bytes, 4)), static_cast<int>(get_u32(bytes, 8))};
  if (bytes.size() != 16 + 8 * static_cast<size_t>(g.size()))
    throw ValidationError("TPF1 block size does not match its header");
  ScalarField u(g);
  for (int k = 0; k < g.size(); ++k) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[16 + 8 * k + b])) << (8 * b);
    std::memcpy(&u.values[k], &bits, 8);
  }
  return u;
}

}  // namespace toruslab
