#include "toruslab/census.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "toruslab/errors.hpp"

namespace toruslab {

std::vector<std::pair<double, double>> expected_set(int n_waves) {
  if (n_waves < 1) throw ValidationError("n_waves must be >= 1");
  std::vector<std::pair<double, double>> out;
  for (double phi : {0.0, M_PI})
    for (int k = 0; k < 2 * n_waves; ++k) out.emplace_back(phi, (2 * k + 1) * M_PI / (2 * n_waves));
  return out;
}

namespace {

struct Derivs {
  std::vector<double> gp, gt;
  double max_gp = 0.0, max_gt = 0.0, max_norm = 0.0;
};

Derivs nodal_gradient(const ScalarField& u, const TorusParams& params) {
  const PeriodicGrid g = u.grid();
  Derivs d;
  d.gp.resize(g.size());
  d.gt.resize(g.size());
  for (int i = 0; i < g.n_phi; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      const int k = g.index(i, j);
      d.gp[k] = (u(g.wrap_phi(i + 1), j) - u(g.wrap_phi(i - 1), j)) / (2.0 * g.h_phi());
      d.gt[k] = (u(i, g.wrap_theta(j + 1)) - u(i, g.wrap_theta(j - 1))) / (2.0 * g.h_theta());
      d.max_gp = std::max(d.max_gp, std::abs(d.gp[k]));
      d.max_gt = std::max(d.max_gt, std::abs(d.gt[k]));
      const MetricPoint mp = metric_at(params, g.phi(i), g.theta(j));
      d.max_norm = std::max(d.max_norm, std::sqrt(gradient_norm_sq(d.gp[k], d.gt[k], mp)));
    }
  return d;
}

int sgn(double v, double z) { return v > z ? 1 : (v < -z ? -1 : 0); }

// Periodic distance in cell units.
double cell_dist(double a, double b, int n) {
  double d = std::fmod(std::abs(a - b), static_cast<double>(n));
  return std::min(d, n - d);
}

}  // namespace

CriticalPointReport locate_critical_points(const ScalarField& u, const TorusParams& params,
                                           const CensusOptions& opt) {
  const PeriodicGrid g = u.grid();
  const double hp = g.h_phi(), ht = g.h_theta();
  const Derivs d = nodal_gradient(u, params);
  const double zp = opt.zero_rel * d.max_gp, zt = opt.zero_rel * d.max_gt;

  CriticalPointReport rep;
  rep.expected = expected_set(params.n_waves);
  rep.grad_scale = d.max_norm;

  auto gp_at = [&](int i, int j) { return d.gp[g.index(i, j)]; };
  auto gt_at = [&](int i, int j) { return d.gt[g.index(i, j)]; };

  std::vector<CriticalPoint> found;
  for (int i = 0; i < g.n_phi; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      int lo_p = 2, hi_p = -2, lo_t = 2, hi_t = -2;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const int sp = sgn(gp_at(i + a, j + b), zp), st = sgn(gt_at(i + a, j + b), zt);
          lo_p = std::min(lo_p, sp), hi_p = std::max(hi_p, sp);
          lo_t = std::min(lo_t, st), hi_t = std::max(hi_t, st);
        }
      if (!(lo_p <= 0 && hi_p >= 0 && lo_t <= 0 && hi_t >= 0)) continue;

      // Quadratic model about each corner; keep stationary points inside the cell.
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const int ci = i + a, cj = j + b;
          const double u0 = u(g.wrap_phi(ci), g.wrap_theta(cj));
          const double hpp = (u(g.wrap_phi(ci + 1), g.wrap_theta(cj)) - 2.0 * u0 +
                              u(g.wrap_phi(ci - 1), g.wrap_theta(cj))) / (hp * hp);
          const double htt = (u(g.wrap_phi(ci), g.wrap_theta(cj + 1)) - 2.0 * u0 +
                              u(g.wrap_phi(ci), g.wrap_theta(cj - 1))) / (ht * ht);
          const double hpt = (u(g.wrap_phi(ci + 1), g.wrap_theta(cj + 1)) -
                              u(g.wrap_phi(ci + 1), g.wrap_theta(cj - 1)) -
                              u(g.wrap_phi(ci - 1), g.wrap_theta(cj + 1)) +
                              u(g.wrap_phi(ci - 1), g.wrap_theta(cj - 1))) / (4.0 * hp * ht);
          const double gpc = gp_at(ci, cj), gtc = gt_at(ci, cj);
          const double det = hpp * htt - hpt * hpt;
          const double fro2 = hpp * hpp + htt * htt + 2.0 * hpt * hpt;
          const bool degenerate = std::abs(det) <= opt.degenerate_rel * fro2;
          double dp = 0.0, dt = 0.0;
          if (!degenerate) {
            dp = -(htt * gpc - hpt * gtc) / det;
            dt = -(-hpt * gpc + hpp * gtc) / det;
          } else if (fro2 > 0.0) {
            // Newton step along the dominant eigenvector only.
            const double tr = hpp + htt;
            const double disc = std::sqrt(0.25 * (hpp - htt) * (hpp - htt) + hpt * hpt);
            const double l1 = 0.5 * tr + disc, l2 = 0.5 * tr - disc;
            const double lam = std::abs(l1) >= std::abs(l2) ? l1 : l2;
            double vx = hpt, vy = lam - hpp;
            if (std::hypot(vx, vy) == 0.0) vx = lam - htt, vy = hpt;
            if (std::hypot(vx, vy) == 0.0) vx = 1.0, vy = 0.0;
            const double nv = std::hypot(vx, vy);
            vx /= nv, vy /= nv;
            const double proj = (gpc * vx + gtc * vy) / lam;
            dp = -proj * vx, dt = -proj * vy;
          }
          const double fi = ci + dp / hp, fj = cj + dt / ht;
          const double slack = 1e-9;
          if (fi < i - slack || fi > i + 1 + slack || fj < j - slack || fj > j + 1 + slack) continue;

          // Bilinear gradient at the refined location.
          const double s = std::clamp(fi - i, 0.0, 1.0), t = std::clamp(fj - j, 0.0, 1.0);
          auto bil = [&](auto&& f) {
            return (1 - s) * (1 - t) * f(i, j) + s * (1 - t) * f(i + 1, j) +
                   (1 - s) * t * f(i, j + 1) + s * t * f(i + 1, j + 1);
          };
          const double ip = bil(gp_at), it = bil(gt_at);
          const MetricPoint mp = metric_at(params, fi * hp, fj * ht);
          const double gn = std::sqrt(gradient_norm_sq(ip, it, mp));
          if (!(gn < opt.threshold_rel * d.max_norm)) continue;

          CriticalPoint cp;
          cp.fi = std::fmod(fi + g.n_phi, static_cast<double>(g.n_phi));
          cp.fj = std::fmod(fj + g.n_theta, static_cast<double>(g.n_theta));
          cp.phi = cp.fi * hp;
          cp.theta = cp.fj * ht;
          cp.grad_norm = gn;
          cp.h_pp = hpp, cp.h_pt = hpt, cp.h_tt = htt;
          if (degenerate)
            cp.kind = "degenerate";
          else if (det < 0.0)
            cp.kind = "saddle";
          else
            cp.kind = hpp + htt > 0.0 ? "min" : "max";
          found.push_back(cp);
        }
    }

  // Deduplicate in scan order, keeping the smallest gradient norm.
  for (const CriticalPoint& cp : found) {
    bool merged = false;
    for (CriticalPoint& q : rep.points) {
      if (cell_dist(cp.fi, q.fi, g.n_phi) <= opt.dedupe_cells &&
          cell_dist(cp.fj, q.fj, g.n_theta) <= opt.dedupe_cells) {
        if (cp.grad_norm < q.grad_norm) q = cp;
        merged = true;
        break;
      }
    }
    if (!merged) rep.points.push_back(cp);
  }
  std::sort(rep.points.begin(), rep.points.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    return a.fi != b.fi ? a.fi < b.fi : a.fj < b.fj;
  });
  rep.count = static_cast<int>(rep.points.size());

  for (const auto& e : rep.expected) {
    double best = INFINITY;
    for (const CriticalPoint& cp : rep.points) {
      const double dp = cell_dist(cp.fi, e.first / hp, g.n_phi) * hp;
      const double dt = cell_dist(cp.fj, e.second / ht, g.n_theta) * ht;
      best = std::min(best, std::hypot(dp, dt));
    }
    if (!rep.points.empty()) rep.max_match_distance = std::max(rep.max_match_distance, best);
  }
  return rep;
}

CensusVerdict verify_count(const CriticalPointReport& report, const ScalarField& u,
                           const TorusParams& params, double match_cells, int exclusion_cells) {
  const PeriodicGrid g = u.grid();
  CensusVerdict v;
  v.expected_count = 4 * params.n_waves;
  v.count = report.count;
  for (const CriticalPoint& cp : report.points) v.degenerate += cp.kind == "degenerate";
  if (v.degenerate > 0) v.reasons.push_back("degenerate circles");
  if (v.count != v.expected_count) v.reasons.push_back("count mismatch");

  // One-to-one nearest matching in cell units.
  std::vector<int> used(report.points.size(), 0);
  for (const auto& e : report.expected) {
    double best = INFINITY;
    int arg = -1;
    for (size_t k = 0; k < report.points.size(); ++k) {
      const double dd = std::hypot(cell_dist(report.points[k].fi, e.first / g.h_phi(), g.n_phi),
                                   cell_dist(report.points[k].fj, e.second / g.h_theta(), g.n_theta));
      if (dd < best) best = dd, arg = static_cast<int>(k);
    }
    if (arg >= 0) used[arg]++;
    v.max_match_cells = std::max(v.max_match_cells, best);
  }
  if (!(v.max_match_cells <= match_cells)) v.reasons.push_back("point outside match radius");
  if (std::any_of(used.begin(), used.end(), [](int c) { return c != 1; }))
    v.reasons.push_back("matching not one-to-one");

  // Off-set margin over nodes farther than exclusion_cells (Chebyshev) from the set.
  std::vector<std::pair<int, int>> ex;
  for (const auto& e : report.expected)
    ex.emplace_back(static_cast<int>(std::lround(e.first / g.h_phi())) % g.n_phi,
                    static_cast<int>(std::lround(e.second / g.h_theta())) % g.n_theta);
  v.margin = INFINITY;
  v.margin_rows = INFINITY;
  const ScalarField gn = gradient_norm_sq_field(u, params, g);
  for (int i = 0; i < g.n_phi; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      bool far = true;
      for (const auto& [ei, ej] : ex)
        if (cell_dist(i, ei, g.n_phi) <= exclusion_cells && cell_dist(j, ej, g.n_theta) <= exclusion_cells) {
          far = false;
          break;
        }
      if (!far) continue;
      const double val = std::sqrt(gn(i, j));
      v.margin = std::min(v.margin, val);
      if (i == 0 || 2 * i == g.n_phi) v.margin_rows = std::min(v.margin_rows, val);
    }
  if (!(v.margin > 0.0)) v.reasons.push_back("non-positive off-set gradient margin");
  v.ok = v.reasons.empty();
  return v;
}

std::string census_to_json(const CriticalPointReport& report, const CensusVerdict& verdict) {
  nlohmann::ordered_json j;
  j["count"] = report.count;
  j["points"] = nlohmann::ordered_json::array();
  for (const CriticalPoint& cp : report.points)
    j["points"].push_back({{"phi", cp.phi}, {"theta", cp.theta}, {"kind", cp.kind}, {"grad_norm", cp.grad_norm}});
  j["expected"] = nlohmann::ordered_json::array();
  for (const auto& e : report.expected) j["expected"].push_back({{"phi", e.first}, {"theta", e.second}});
  j["max_match_distance"] = report.max_match_distance;
  j["verdict"] = {{"ok", verdict.ok},
                  {"reasons", verdict.reasons},
                  {"expected_count", verdict.expected_count},
                  {"degenerate", verdict.degenerate},
                  {"max_match_cells", verdict.max_match_cells},
                  {"margin", verdict.margin},
                  {"margin_rows", verdict.margin_rows}};
  return j.dump(2);
}

std::string census_to_csv(const CriticalPointReport& report) {
  std::ostringstream os;
  os << std::setprecision(17) << "phi,theta,kind,grad_norm\n";
  for (const CriticalPoint& cp : report.points)
    os << cp.phi << ',' << cp.theta << ',' << cp.kind << ',' << cp.grad_norm << '\n';
  return os.str();
}

}  // namespace toruslab
