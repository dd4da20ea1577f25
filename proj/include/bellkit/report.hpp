#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <json.hpp>

#include "bellkit/bellgen.hpp"
#include "bellkit/qstate.hpp"
#include "bellkit/qudit.hpp"
#include "bellkit/violation.hpp"

namespace bellkit::report {

using Json = nlohmann::ordered_json;

inline constexpr const char *schema = "bellkit/1";

/// Rounds to 12 significant digits so that the printed form is stable.
/// Values below 1e-12 in magnitude are floating-point residue and print as 0.
inline double r12(double x)
{
  if (!std::isfinite(x)) return x;
  if (std::abs(x) < 1e-12) return 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  const double v = std::strtod(buf, nullptr);
  return v == 0.0 ? 0.0 : v;  // drop negative zero
}

inline std::string fmt(double x)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", r12(x));
  return buf;
}

inline Json num(double x) { return r12(x); }

inline Json vec(const std::vector<double> &v)
{
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

inline Json complex_num(cplx z) { return Json::array({num(z.real()), num(z.imag())}); }

/// Column-major list of columns, each a list of [re, im].
inline Json complex_matrix(const CMat &M)
{
  Json cols = Json::array();
  for (Eigen::Index c = 0; c < M.cols(); ++c) {
    Json col = Json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) col.push_back(complex_num(M(r, c)));
    cols.push_back(col);
  }
  return cols;
}

inline Json real_matrix(const Mat3 &M)
{
  Json rows = Json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(Json::array({num(M(r, 0)), num(M(r, 1)), num(M(r, 2))}));
  return rows;
}

/// {parties, settings, coefficients: [[k-tuple, value]...], lr_bound, label}.
inline Json to_json(const BellInequality &b)
{
  Json coeffs = Json::array();
  for (const auto &[k, c] : b.coefficients) {
    Json key = Json::array();
    for (int x : k) key.push_back(x + 1);
    coeffs.push_back(Json::array({key, num(c)}));
  }
  return Json{{"parties", b.parties},    {"settings", b.settings}, {"coefficients", coeffs},
              {"lr_bound", num(b.lr_bound)}, {"label", b.label}};
}

inline Json to_json(const ConditionResult &r, const std::string &state)
{
  Json frames = Json::array();
  for (const auto &f : r.frames) frames.push_back(real_matrix(f.rotation));
  return Json{{"condition", r.condition},
              {"state", state},
              {"value", num(r.value)},
              {"bound", num(r.bound)},
              {"violation_factor", num(r.violation_factor)},
              {"converged", r.converged},
              {"frames", frames},
              {"seed", r.seed},
              {"restarts", r.restarts}};
}

inline Json to_json(const qudit::EigenSystem &e)
{
  Json vals = Json::array(), labels = Json::array();
  for (auto v : e.values) vals.push_back(complex_num(v));
  for (auto [g, a] : e.labels) labels.push_back(Json{{"g", g}, {"a", a}});
  return Json{{"d", e.d},           {"k", e.k},
              {"l", e.l},           {"f", e.f},
              {"phase", complex_num(e.phase)}, {"values", vals},
              {"labels", labels},   {"vectors", complex_matrix(e.vectors)},
              {"residual_below_tolerance", e.residual < tol::algebraic}};
}

inline Json to_json(const qudit::MeasurementPlan &p)
{
  Json stage2 = Json::array();
  for (const auto &B : p.stage2_bases) stage2.push_back(complex_matrix(B));
  return Json{{"d1", p.d1}, {"d0", p.d0}, {"stage1_basis", complex_matrix(p.stage1_basis)}, {"stage2_bases", stage2}};
}

/// Simple CSV writer with a fixed header.
struct Csv {
  std::vector<std::string> header;
  std::vector<std::string> comments;
  std::vector<std::vector<std::string>> rows;

  void row(const std::vector<double> &v)
  {
    std::vector<std::string> r;
    for (double x : v) r.push_back(fmt(x));
    rows.push_back(std::move(r));
  }
  std::string str() const
  {
    std::string s;
    for (const auto &c : comments) s += "# " + c + "\n";
    for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
    s += "\n";
    for (const auto &r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
      s += "\n";
    }
    return s;
  }
};

}  // namespace bellkit::report
