#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bellkit/bellgen.hpp"
#include "bellkit/ccp.hpp"
#include "bellkit/freedom.hpp"
#include "bellkit/leggett.hpp"
#include "bellkit/protocols.hpp"
#include "bellkit/qstate.hpp"
#include "bellkit/qudit.hpp"
#include "bellkit/report.hpp"
#include "bellkit/violation.hpp"

namespace bellkit::cli {

using report::Json;

enum class Exit : int { ok = 0, validation = 2, guard = 3 };

struct Request {
  std::string command;
  std::map<std::string, std::string> params;
  std::uint64_t seed = 20070101;
  std::optional<int> restarts;
  std::uint64_t samples = 1000000;
  std::string format = "json";
  std::string out;
  bool quiet = false;
};

struct Diagnostic {
  enum class Kind { unknown_key, range, guard } kind;
  std::string message;
};

/// One accepted parameter of a command.
struct ParamSpec {
  std::string key;
  enum class Type { integer, real, text } type = Type::real;
  std::string fallback;
  double lo = -1e300, hi = 1e300;
  std::vector<std::string> choices;  // for text
  std::string help;
};

struct CommandSpec {
  std::string name;
  std::string help;
  std::vector<ParamSpec> params;
  bool csv = true;
};

inline const std::vector<CommandSpec> &commands()
{
  using T = ParamSpec::Type;
  static const std::vector<CommandSpec> cmds = {
      {"bounds",
       "LR bound, quantum maximum and violation factor of the M-setting inequality",
       {{"n", T::integer, "3", 2, 1e9, {}, "parties"},
        {"m", T::integer, "2", 2, 1e9, {}, "settings per party"},
        {"structure", T::text, "", 0, 0, {}, "multisetting structure, e.g. 4,4,2 (optional)"}}},
      {"violation",
       "violation conditions, factors and critical visibility for a named state",
       {{"state", T::text, "ghz_plus", 0, 0,
         {"singlet", "phi_plus", "ghz_plus", "ghz_minus", "generalized_ghz", "w", "dur", "wz_four_qubit"}, "named state"},
        {"n", T::integer, "3", 1, 1e9, {}, "qubits"},
        {"alpha-deg", T::real, "0", 0, 45, {}, "generalized GHZ angle or Dur phase (degrees)"},
        {"visibility", T::real, "1", 0, 1, {}, "white-noise visibility"},
        {"condition", T::text, "cn", 0, 0, {"horodecki", "wwzb", "cn", "msetting"}, "condition"},
        {"m", T::integer, "2", 2, 64, {}, "settings for the msetting condition"}}},
      {"leggett-sweep",
       "NLHV and CHSH values against their bounds over the difference angle",
       {{"phi-min", T::real, "0", 0, 180, {}, "start angle (degrees)"},
        {"phi-max", T::real, "40", 0, 180, {}, "end angle (degrees)"},
        {"step", T::real, "2", 1e-6, 180, {}, "angle step (degrees)"},
        {"visibility", T::real, "1", 0, 1, {}, "visibility"}}},
      {"freedom",
       "lack-of-freedom measures, Mermin scaling and attack curves",
       {{"n-max", T::integer, "8", 2, 16, {}, "largest party count"},
        {"phi-step-deg", T::real, "5", 1e-3, 90, {}, "attack angle step (degrees)"}}},
      {"leak-sweep",
       "leaking-lab CHSH security quantities over setting knowledge Q",
       {{"q-min", T::real, "0.125", 0.125, 1, {}, "start Q"},
        {"q-max", T::real, "1", 0.125, 1, {}, "end Q"},
        {"step", T::real, "0.025", 1e-6, 1, {}, "Q step"}}},
      {"qudit-eigen",
       "closed-form eigenbasis of S_kl and the composite measurement plan",
       {{"d", T::integer, "6", 2, 64, {}, "dimension"},
        {"k", T::integer, "4", 0, 63, {}, "power of S_x"},
        {"l", T::integer, "3", 0, 63, {}, "power of S_z"},
        {"d1", T::integer, "0", 0, 64, {}, "first factor for the plan (0: none)"}},
       false},
      {"ccp-tables",
       "qubit success-ratio table and qudit Delta table",
       {{"n-max", T::integer, "5", 2, 8, {}, "largest N"},
        {"m-max", T::integer, "5", 2, 8, {}, "largest M"},
        {"d-min", T::integer, "3", 3, 8, {}, "smallest d"},
        {"d-max", T::integer, "8", 3, 8, {}, "largest d"}}},
      {"protocols", "dense coding, teleportation and GHZ paradox checks",
       {{"trials", T::integer, "100", 1, 1e6, {}, "random teleported states"}}, false},
      {"all", "every report in one JSON document", {}, false},
  };
  return cmds;
}

inline const CommandSpec *find_command(const std::string &name)
{
  for (const auto &c : commands())
    if (c.name == name) return &c;
  return nullptr;
}

/// Typed parameter access with defaults from the command spec.
class Params {
 public:
  Params(const CommandSpec &spec, const std::map<std::string, std::string> &raw) : spec_(spec), raw_(raw) {}

  std::string text(const std::string &key) const
  {
    auto it = raw_.find(key);
    return it != raw_.end() ? it->second : find(key).fallback;
  }
  double real(const std::string &key) const { return std::stod(text(key)); }
  int integer(const std::string &key) const { return std::stoi(text(key)); }

 private:
  const ParamSpec &find(const std::string &key) const
  {
    for (const auto &p : spec_.params)
      if (p.key == key) return p;
    throw ValidationError("unknown parameter " + key);
  }
  const CommandSpec &spec_;
  const std::map<std::string, std::string> &raw_;
};

inline bool parse_number(const std::string &s, bool integer, double &out)
{
  try {
    std::size_t pos = 0;
    if (integer) {
      const long long v = std::stoll(s, &pos);
      out = static_cast<double>(v);
    } else {
      out = std::stod(s, &pos);
    }
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

/// Lists unknown keys, out-of-range values and size-guard projections.
inline std::vector<Diagnostic> validate(const Request &req)
{
  using K = Diagnostic::Kind;
  std::vector<Diagnostic> d;
  const CommandSpec *spec = find_command(req.command);
  if (!spec) {
    d.push_back({K::unknown_key, "unknown command '" + req.command + "'"});
    return d;
  }
  if (req.format != "json" && req.format != "csv") d.push_back({K::range, "format must be json or csv"});
  if (req.format == "csv" && !spec->csv) d.push_back({K::range, "command '" + spec->name + "' emits JSON only"});
  if (req.restarts && *req.restarts < 1) d.push_back({K::range, "restarts must be positive"});
  if (req.samples < 1) d.push_back({K::range, "samples must be positive"});

  for (const auto &[key, value] : req.params) {
    const ParamSpec *p = nullptr;
    for (const auto &s : spec->params)
      if (s.key == key) p = &s;
    if (!p) {
      d.push_back({K::unknown_key, "unknown parameter '" + key + "' for " + spec->name});
      continue;
    }
    if (p->type == ParamSpec::Type::text) {
      if (!p->choices.empty() && std::find(p->choices.begin(), p->choices.end(), value) == p->choices.end())
        d.push_back({K::range, key + " must be one of the listed choices"});
      continue;
    }
    double v = 0;
    if (!parse_number(value, p->type == ParamSpec::Type::integer, v)) {
      d.push_back({K::range, key + " is not a valid number"});
      continue;
    }
    if (v < p->lo || v > p->hi) {
      std::ostringstream os;
      os << key << " = " << value << " outside [" << report::fmt(p->lo) << ", " << report::fmt(p->hi) << "]";
      d.push_back({K::range, os.str()});
    }
  }
  if (!d.empty()) return d;

  const Params P(*spec, req.params);
  if (spec->name == "violation") {
    const int n = P.integer("n");
    if (n > max_qubits)
      d.push_back({K::guard, "n = " + std::to_string(n) + " qubits needs a 4^" + std::to_string(n) +
                                 " tensor, above the " + std::to_string(max_qubits) + "-qubit cap"});
    const std::string c = P.text("condition");
    if (c == "horodecki" && n != 2) d.push_back({K::range, "horodecki condition needs n = 2"});
    if (c == "cn" && n > 6) d.push_back({K::guard, "cn condition is limited to n <= 6"});
    if (c == "cn" && n < 2) d.push_back({K::range, "cn condition needs n >= 2"});
    const std::string s = P.text("state");
    if ((s == "singlet" || s == "phi_plus") && n != 2) d.push_back({K::range, s + " has n = 2"});
    if (s == "wz_four_qubit" && n != 4) d.push_back({K::range, "wz_four_qubit has n = 4"});
  }
  if (spec->name == "bounds") {
    const double terms = std::pow(P.real("m"), P.real("n"));
    if (terms > 1e6) d.push_back({K::guard, "M^N = " + report::fmt(terms) + " exceeds the 1e6-term guard"});
  }
  if (spec->name == "leggett-sweep" && P.real("phi-min") > P.real("phi-max"))
    d.push_back({K::range, "phi-min exceeds phi-max"});
  if (spec->name == "leak-sweep" && P.real("q-min") > P.real("q-max")) d.push_back({K::range, "q-min exceeds q-max"});
  if (spec->name == "ccp-tables" && P.integer("d-min") > P.integer("d-max"))
    d.push_back({K::range, "d-min exceeds d-max"});
  if (spec->name == "ccp-tables" && std::pow(P.real("m-max"), P.real("n-max")) > 1e6)
    d.push_back({K::guard, "M^N exceeds the 1e6-term guard"});
  if (spec->name == "qudit-eigen") {
    const int dd = P.integer("d"), d1 = P.integer("d1");
    if (P.integer("k") >= dd || P.integer("l") >= dd) d.push_back({K::range, "k and l must be below d"});
    if (d1 != 0 && (d1 < 2 || dd % d1 != 0 || dd / d1 < 2)) d.push_back({K::range, "d1 must be a proper factor of d"});
  }
  return d;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct Output {
  Json json;
  std::string csv;
};

inline OptimizerConfig config_of(const Request &req)
{
  OptimizerConfig c;
  c.seed = req.seed;
  if (req.restarts) c.restarts = *req.restarts;
  return c;
}

inline NamedStateSpec state_of(const Params &P)
{
  const std::string s = P.text("state");
  const int n = P.integer("n");
  const double alpha = leggett::rad(P.real("alpha-deg"));
  NamedStateSpec spec;
  if (s == "singlet") spec = NamedStateSpec::singlet();
  else if (s == "phi_plus") spec = NamedStateSpec::phi_plus();
  else if (s == "ghz_plus") spec = NamedStateSpec::ghz_plus(n);
  else if (s == "ghz_minus") spec = NamedStateSpec::ghz_minus(n);
  else if (s == "generalized_ghz") spec = NamedStateSpec::generalized_ghz(n, alpha);
  else if (s == "w") spec = NamedStateSpec::w(n);
  else if (s == "dur") spec = NamedStateSpec::dur(n, alpha);
  else spec = NamedStateSpec::wz_four_qubit();
  const double V = P.real("visibility");
  return V < 1.0 ? NamedStateSpec::noisy(spec, V) : spec;
}

inline Output bounds_report(const Request &, const Params &P)
{
  const int n = P.integer("n"), m = P.integer("m");
  Output o;
  const BellInequality ineq = msetting_inequality(n, m);
  Json j{{"n", n},
         {"m", m},
         {"eta", msetting_eta(n, m)},
         {"B_LR", report::num(msetting_lr_bound(n, m))},
         {"quantum_max", report::num(msetting_quantum_max(n, m))},
         {"violation_factor", report::num(msetting_violation_factor(n, m))}};
  if (n * m <= 20) j["B_LR_bruteforce"] = report::num(lr_bound_bruteforce(ineq));
  if (ineq.correlation_dim() <= 64) j["inequality"] = report::to_json(ineq);
  const std::string structure = P.text("structure");
  if (!structure.empty()) {
    std::vector<int> st;
    std::stringstream ss(structure);
    for (std::string tok; std::getline(ss, tok, ',');) st.push_back(std::stoi(tok));
    const BellInequality g = multisetting_generate(st);
    Json mj = report::to_json(g);
    int total = 0;
    for (int s : st) total += s;
    if (total <= 20) mj["lr_bound_bruteforce"] = report::num(lr_bound_bruteforce(g));
    if (g.correlation_dim() <= 64) {
      const TightnessResult t = tightness_check(g);
      mj["tightness"] = Json{{"is_tight", t.is_tight},
                             {"saturating_rank", t.saturating_rank},
                             {"ambient_dim", t.ambient_dim},
                             {"saturating_plus", t.saturating_plus},
                             {"saturating_minus", t.saturating_minus}};
    }
    j["multisetting"] = mj;
  }
  o.json = j;
  report::Csv csv;
  csv.header = {"n", "m", "B_LR", "quantum_max", "violation_factor"};
  csv.row({double(n), double(m), msetting_lr_bound(n, m), msetting_quantum_max(n, m), msetting_violation_factor(n, m)});
  o.csv = csv.str();
  return o;
}

inline Output violation_report(const Request &req, const Params &P)
{
  const NamedStateSpec spec = state_of(P);
  const OptimizerConfig cfg = config_of(req);
  const CorrelationTensor T = correlation_tensor(make_state(spec), spec.parties());
  const std::string c = P.text("condition");
  ConditionSpec cs;
  Json j{{"state", spec.name()}, {"n", spec.parties()}, {"visibility", report::num(P.real("visibility"))}};
  double value = 0;
  if (c == "horodecki") {
    cs.kind = ConditionSpec::Kind::horodecki;
    value = horodecki_value(T);
    j["result"] = Json{{"condition", "horodecki"},
                       {"value", report::num(value)},
                       {"bound", 1},
                       {"max_chsh", report::num(2.0 * std::sqrt(value))}};
  } else if (c == "wwzb" || c == "cn") {
    cs.kind = c == "wwzb" ? ConditionSpec::Kind::wwzb : ConditionSpec::Kind::cn;
    const ConditionResult r = c == "wwzb" ? wwzb_sufficient(T, cfg) : cn_condition(T, cfg);
    value = r.value;
    j["result"] = report::to_json(r, spec.name());
  } else {
    cs.kind = ConditionSpec::Kind::msetting;
    cs.M = P.integer("m");
    const MsViolation r = ms_violation(T, cs.M, cfg);
    value = r.violation_factor;
    j["result"] = Json{{"condition", cs.name()},
                       {"lhs", report::num(r.lhs)},
                       {"bound", report::num(r.bound)},
                       {"violation_factor", report::num(r.violation_factor)},
                       {"converged", r.converged},
                       {"seed", cfg.seed},
                       {"restarts", cfg.restarts}};
  }
  const bool linear = cs.kind == ConditionSpec::Kind::msetting;
  j["critical_visibility"] = value > 0 ? report::num(linear ? 1.0 / value : 1.0 / std::sqrt(value)) : Json(nullptr);
  Output o;
  o.json = j;
  report::Csv csv;
  csv.header = {"value", "critical_visibility"};
  csv.row({value, value > 0 ? (linear ? 1.0 / value : 1.0 / std::sqrt(value)) : 0.0});
  o.csv = csv.str();
  return o;
}

inline Output leggett_report(const Request &req, const Params &P)
{
  const double lo = P.real("phi-min"), hi = P.real("phi-max"), step = P.real("step"), V = P.real("visibility");
  report::Csv csv;
  csv.header = {"phi_deg", "s_nlhv", "nlhv_bound", "s_chsh", "chsh_bound"};
  Json rows = Json::array();
  double win_lo = -1, win_hi = -1;
  const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (int i = 0; i < count; ++i) {
    const double deg = lo + i * step, phi = leggett::rad(deg);
    const double s = leggett::nlhv_quantum(phi, V), b = leggett::nlhv_bound(phi);
    const double chsh = leggett::chsh_at_settings(phi, V);
    csv.row({deg, s, b, chsh, 2.0});
    rows.push_back(Json{{"phi_deg", report::num(deg)},
                        {"s_nlhv", report::num(s)},
                        {"nlhv_bound", report::num(b)},
                        {"s_chsh", report::num(chsh)},
                        {"chsh_bound", 2}});
    if (s > b) {
      if (win_lo < 0) win_lo = deg;
      win_hi = deg;
    }
  }
  const auto t = leggett::nlhv_visibility_thresholds();
  const double po = leggett::ri_free_phi_opt();
  const auto ri = leggett::ri_free_inequality(po);
  if (win_lo >= 0) csv.comments.push_back("violation window (grid) " + report::fmt(win_lo) + " to " + report::fmt(win_hi) + " deg");
  else csv.comments.push_back("no violation on the grid");
  csv.comments.push_back("phi* " + report::fmt(leggett::deg(t.phi_star)) + " deg, critical visibility " + report::fmt(t.v_nlhv));

  const Vec3 u(0, 0, 1), a(1, 0, 0), b(std::cos(pi / 3), std::sin(pi / 3), 0);
  const auto mc = leggett::simulate_correlations(u, a, b, req.samples, req.seed);
  Output o;
  o.csv = csv.str();
  o.json = Json{{"visibility", report::num(V)},
                {"rows", rows},
                {"violation_window_deg", win_lo >= 0 ? Json::array({report::num(win_lo), report::num(win_hi)}) : Json(nullptr)},
                {"thresholds",
                 {{"phi_star_deg", report::num(leggett::deg(t.phi_star))},
                  {"bound", report::num(t.bound)},
                  {"quantum", report::num(t.quantum)},
                  {"v_nlhv", report::num(t.v_nlhv)},
                  {"chsh_value", report::num(t.chsh_value)},
                  {"v_chsh", report::num(t.v_chsh)}}},
                {"measured",
                 {{"s_nlhv", report::num(leggett::measured_s_nlhv())}, {"s_chsh", report::num(leggett::measured_s_chsh())}}},
                {"ri_free",
                 {{"phi_opt_deg", report::num(leggett::deg(po))},
                  {"bound", report::num(ri.bound)},
                  {"value", report::num(ri.value)},
                  {"critical_visibility", report::num(ri.bound / ri.value)}}},
                {"model_monte_carlo",
                 {{"samples", req.samples},
                  {"seed", req.seed},
                  {"mean_A", report::num(mc.mean_A)},
                  {"mean_B", report::num(mc.mean_B)},
                  {"mean_AB", report::num(mc.mean_AB)},
                  {"expected_AB", report::num(-a.dot(b))},
                  {"stderr_AB", report::num(mc.stderr_AB)}}}};
  return o;
}

inline Output freedom_report(const Request &, const Params &P)
{
  const auto q = freedom::minimal_delta(freedom::quantum_maximal_table());
  const auto sk = freedom::delta_measures(freedom::source_knows_settings_table(), freedom::quantum_maximal_table());
  Json mermin = Json::array();
  report::Csv csv;
  csv.header = {"N", "B", "M_qm", "delta_merm_min", "delta_N"};
  for (int n = 2; n <= P.integer("n-max"); ++n) {
    const auto m = freedom::mermin_freedom(n);
    mermin.push_back(Json{{"N", n},
                          {"B", report::num(m.B)},
                          {"M_qm", report::num(m.M_qm)},
                          {"delta_merm_min", report::num(m.delta_merm_min)},
                          {"delta_N", report::num(m.delta_N)}});
    csv.row({double(n), m.B, m.M_qm, m.delta_merm_min, m.delta_N});
  }
  Json eve = Json::array();
  const double st = P.real("phi-step-deg");
  for (int i = 0; i * st <= 90.0 + 1e-9; ++i) {
    const auto c = freedom::eve_attack_curves(leggett::rad(i * st));
    eve.push_back(Json{{"phi_deg", report::num(i * st)},
                       {"S_AB", report::num(c.S_AB)},
                       {"S_AE", report::num(c.S_AE)},
                       {"S_BE", report::num(c.S_BE)}});
  }
  Output o;
  o.csv = csv.str();
  o.json = Json{{"chsh",
                 {{"s_quantum", report::num(q.s_measured)},
                  {"delta_chsh", report::num(q.delta_chsh)},
                  {"delta_uniform_signed", report::num(q.delta_uniform_signed)},
                  {"delta_uniform_positive", report::num(q.delta_uniform_positive)}}},
                {"source_knows_settings", {{"s_delta", report::num(sk.s_measured)}, {"adapted_bound", report::num(2.0 + (sk.s_measured - 2.0))}}},
                {"mermin", mermin},
                {"eve_attack", eve}};
  return o;
}

inline Output leak_report(const Request &, const Params &P)
{
  const double lo = P.real("q-min"), hi = P.real("q-max"), step = P.real("step");
  const auto th = freedom::leak_thresholds();
  report::Csv csv;
  csv.comments = {"Q_cl " + report::fmt(th.Q_cl), "Q_0 " + report::fmt(th.Q_0), "Q_qm " + report::fmt(th.Q_qm)};
  csv.header = {"Q", "S", "D", "I_AB", "I_AE", "I_BE", "I_BE_tilde", "chsh_violated", "looks_secure", "actually_secure"};
  Json rows = Json::array();
  const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (int i = 0; i < count; ++i) {
    const double Q = std::min(1.0, lo + i * step);
    const auto r = freedom::leak_analysis(Q);
    csv.row({Q, r.S, r.D, r.I_AB, r.I_AE, r.I_BE, r.I_BE_tilde, double(r.chsh_violated), double(r.looks_secure),
             double(r.actually_secure)});
    rows.push_back(Json{{"Q", report::num(Q)},
                        {"S", report::num(r.S)},
                        {"D", report::num(r.D)},
                        {"I_AB", report::num(r.I_AB)},
                        {"I_AE", report::num(r.I_AE)},
                        {"I_BE", report::num(r.I_BE)},
                        {"I_BE_tilde", report::num(r.I_BE_tilde)},
                        {"chsh_violated", r.chsh_violated},
                        {"looks_secure", r.looks_secure},
                        {"actually_secure", r.actually_secure}});
  }
  Output o;
  o.csv = csv.str();
  o.json = Json{{"thresholds", {{"Q_cl", report::num(th.Q_cl)}, {"Q_0", report::num(th.Q_0)}, {"Q_qm", report::num(th.Q_qm)}}},
                {"rows", rows}};
  return o;
}

inline Output qudit_report(const Request &, const Params &P)
{
  const int d = P.integer("d"), d1 = P.integer("d1");
  Json j{{"eigensystem", report::to_json(qudit::eigensystem(d, P.integer("k"), P.integer("l")))}};
  if (d1 != 0) j["plan"] = report::to_json(qudit::composite_plan(d1, d / d1));
  return {j, ""};
}

inline Output ccp_report(const Request &req, const Params &P)
{
  report::Csv csv;
  csv.header = {"table", "row", "col", "value", "extra"};
  Json qubit = Json::array();
  for (int n = 2; n <= P.integer("n-max"); ++n)
    for (int m = 2; m <= P.integer("m-max"); ++m) {
      const auto cl = ccp::qubit_ccp_success(n, m, ccp::QubitStrategy::classical_optimal);
      const auto qm = ccp::qubit_ccp_success(n, m, ccp::QubitStrategy::quantum_ghz);
      qubit.push_back(Json{{"N", n},
                           {"M", m},
                           {"p_classical", report::num(cl.success)},
                           {"p_quantum", report::num(qm.success)},
                           {"ratio", report::num(qm.success / cl.success)}});
      csv.row({0, double(n), double(m), qm.success / cl.success, cl.success});
    }
  Json qudit = Json::array();
  OptimizerConfig cfg = ccp::cglmp_default_config();
  cfg.seed = req.seed;
  if (req.restarts) cfg.restarts = *req.restarts;
  for (int d = P.integer("d-min"); d <= P.integer("d-max"); ++d) {
    const auto r = ccp::cglmp_optimize(d, cfg);
    const double delta = ccp::qudit_ccp_delta(ccp::strategy_from_cglmp(r.state, r.settings), d);
    qudit.push_back(Json{{"d", d},
                         {"max_violation", report::num(r.value)},
                         {"delta_q", report::num(delta)},
                         {"delta_q_minus_delta_c", report::num(delta - 0.5)},
                         {"schmidt", report::vec(r.schmidt)},
                         {"converged", r.converged}});
    csv.row({1, double(d), 0, r.value, delta});
  }
  return {Json{{"qubit", qubit}, {"qudit", qudit}, {"seed", req.seed}}, csv.str()};
}

inline Output protocols_report(const Request &req, const Params &P)
{
  Json dense = Json::array();
  for (int b2 = 0; b2 < 2; ++b2)
    for (int b1 = 0; b1 < 2; ++b1) {
      const auto r = protocols::dense_coding_roundtrip(b1, b2);
      dense.push_back(Json{{"in", {b1, b2}}, {"out", {r.bits.first, r.bits.second}}, {"probability", report::num(r.probability)}});
    }
  const int trials = P.integer("trials");
  double worst = 0, pworst = 0;
  CounterRng rng{req.seed};
  for (int t = 0; t < trials; ++t) {
    CVec v(2);
    v << cplx(rng.uniform(4 * t) - 0.5, rng.uniform(4 * t + 1) - 0.5), cplx(rng.uniform(4 * t + 2) - 0.5, rng.uniform(4 * t + 3) - 0.5);
    const StateVector psi = StateVector::normalized(v);
    for (int k = 0; k < 4; ++k) {
      const auto b = protocols::teleport(psi, k);
      worst = std::max(worst, std::abs(1.0 - b.fidelity));
      pworst = std::max(pworst, std::abs(b.probability - 0.25));
    }
  }
  const auto g = protocols::ghz_paradox_check();
  return {Json{{"dense_coding", dense},
               {"teleportation", {{"trials", trials}, {"max_fidelity_error_below_1e-10", worst < 1e-10}, {"max_probability_error_below_1e-10", pworst < 1e-10}}},
               {"ghz_paradox",
                {{"eigen_relations", g.eigen_relations},
                 {"mermin_value", report::num(g.mermin_value)},
                 {"mermin_bound", report::num(g.mermin_bound)},
                 {"lr_models_found", g.lr_models_found}}}},
          ""};
}

inline Output dispatch(const Request &req);

inline Output all_report(const Request &req)
{
  Json j;
  for (const auto &c : commands()) {
    if (c.name == "all") continue;
    Request sub = req;
    sub.command = c.name;
    sub.params.clear();
    j[c.name] = dispatch(sub).json;
  }
  return {j, ""};
}

inline Output dispatch(const Request &req)
{
  const CommandSpec &spec = *find_command(req.command);
  const Params P(spec, req.params);
  if (spec.name == "bounds") return bounds_report(req, P);
  if (spec.name == "violation") return violation_report(req, P);
  if (spec.name == "leggett-sweep") return leggett_report(req, P);
  if (spec.name == "freedom") return freedom_report(req, P);
  if (spec.name == "leak-sweep") return leak_report(req, P);
  if (spec.name == "qudit-eigen") return qudit_report(req, P);
  if (spec.name == "ccp-tables") return ccp_report(req, P);
  if (spec.name == "protocols") return protocols_report(req, P);
  return all_report(req);
}

/// Produces the report text for a valid request.
inline std::string render(const Request &req)
{
  const Output o = dispatch(req);
  if (req.format == "csv") return o.csv;
  Json doc{{"schema", report::schema}, {"command", req.command}, {"seed", req.seed}};
  // Effective parameters, defaults included, with their declared types.
  const CommandSpec &spec = *find_command(req.command);
  const Params P(spec, req.params);
  Json params = Json::object();
  for (const auto &ps : spec.params) {
    if (ps.type == ParamSpec::Type::integer) params[ps.key] = P.integer(ps.key);
    else if (ps.type == ParamSpec::Type::real) params[ps.key] = report::num(P.real(ps.key));
    else params[ps.key] = P.text(ps.key);
  }
  doc["params"] = params;
  doc["report"] = o.json;
  return doc.dump(2) + "\n";
}

/// Validates, runs and writes the report; returns the process exit code.
inline int run(const Request &req, std::ostream &out, std::ostream &err)
{
  const auto diags = validate(req);
  int code = 0;
  for (const auto &d : diags) {
    err << (d.kind == Diagnostic::Kind::guard ? "guard: " : "error: ") << d.message << "\n";
    code = std::max(code, d.kind == Diagnostic::Kind::guard ? int(Exit::guard) : int(Exit::validation));
  }
  // Range and key errors take precedence over guard projections.
  for (const auto &d : diags)
    if (d.kind != Diagnostic::Kind::guard) code = int(Exit::validation);
  if (code != 0) return code;
  std::string text;
  try {
    text = render(req);
  } catch (const GuardError &e) {
    err << "guard: " << e.what() << "\n";
    return int(Exit::guard);
  } catch (const ValidationError &e) {
    err << "error: " << e.what() << "\n";
    return int(Exit::validation);
  }
  if (req.out.empty()) {
    out << text;
  } else {
    std::ofstream f(req.out, std::ios::binary);
    if (!f) {
      err << "error: cannot write " << req.out << "\n";
      return int(Exit::validation);
    }
    f << text;
    if (!req.quiet) err << "wrote " << req.out << "\n";
  }
  return int(Exit::ok);
}

}  // namespace bellkit::cli
