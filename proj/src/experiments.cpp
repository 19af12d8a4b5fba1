#include "fioindex/experiments.hpp"

#include "fioindex/expression.hpp"
#include "fioindex/geometry.hpp"
#include "fioindex/parallel.hpp"
#include "fioindex/star.hpp"
#include "fioindex/traces.hpp"
#include "fioindex/weyl.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace fioindex {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Parameter schemas

json param(const std::string& type, json def, const std::string& doc) {
  return json{{"type", type}, {"default", std::move(def)}, {"doc", doc}};
}

bool type_matches(const json& v, const std::string& type) {
  if (type == "integer") return v.is_number_integer();
  if (type == "number") return v.is_number();
  if (type == "string") return v.is_string();
  if (type == "array") return v.is_array();
  if (type == "object") return v.is_object();
  if (type == "boolean") return v.is_boolean();
  return false;
}

json fill_params(const json& given, const json& schema, const std::string& field) {
  if (!given.is_object()) throw ConfigError(field, "params must be an object");
  json out = json::object();
  for (const auto& [key, value] : given.items()) {
    if (!schema.contains(key)) throw ConfigError(field + "/" + key, "unknown parameter");
    const std::string type = schema[key]["type"];
    if (!type_matches(value, type)) throw ConfigError(field + "/" + key, "expected " + type);
    out[key] = value;
  }
  for (const auto& [key, spec] : schema.items())
    if (!out.contains(key)) out[key] = spec["default"];
  for (const auto& [key, value] : out.items())
    if (key.find("tol") != std::string::npos && value.is_number() && !(value.get<double>() > 0))
      throw ConfigError(field + "/" + key, "tolerances must be positive");
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Runs `body` and records its outcome; exceptions become failed records.
template <typename Body>
CheckRecord run_check(const std::string& name, json inputs, const std::string& provenance, Body&& body) {
  CheckRecord r;
  r.name = name;
  r.inputs = std::move(inputs);
  r.provenance = provenance;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.pass = false;
    r.measured["error"] = e.what();
  }
  r.runtime = seconds_since(t0);
  return r;
}

double sup(const GridFunction& g) { return g.abs().maxCoeff(); }

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

StarOptions star_options(const RunSettings& s) {
  StarOptions o;
  o.K = s.K;
  o.hbar_ladder = s.hbar_ladder;
  o.jobs = s.jobs;
  return o;
}

Symbol winding_symbol(long m) { return parse_symbol("exp(i*" + std::to_string(m) + "*x)"); }

// ---------------------------------------------------------------------------
// weyl_identities

SuiteReport run_weyl(const ExperimentConfig& c, const RunSettings& s) {
  const json& p = c.params;
  SuiteReport rep{c.id, c.kind, {}, {}};
  std::mt19937 rng(static_cast<std::mt19937::result_type>(s.seed));
  const int count = p["count"], max_degree = p["max_degree"], max_dim = p["max_dim"];
  for (int t = 0; t < count; ++t) {
    const int n = 1 + t % max_dim;
    const auto h = weyl::random_hamiltonian(rng, n, max_degree);
    const auto k = weyl::random_hamiltonian(rng, n, max_degree);
    const auto w = weyl::random_test_element(rng, n, max_degree);
    rep.checks.push_back(run_check("trial_" + std::to_string(t), {{"dim", n}, {"trial", t}}, "exact", [&](CheckRecord& r) {
      const auto f = weyl::fedosov_connection_check(h, w);
      const auto b = weyl::bracket_identity_check(h, k, w);
      r.measured = {{"fedosov", f.pass},
                    {"bracket_derivation", b.derivation_pass},
                    {"vector_parts", b.vector_parts_agree},
                    {"defect_central", b.defect_central}};
      r.expected = {{"fedosov", true}, {"bracket_derivation", true}, {"vector_parts", true}, {"defect_central", true}};
      r.pass = f.pass && b.derivation_pass && b.vector_parts_agree && b.defect_central;
    }));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// star_product

SuiteReport run_star(const ExperimentConfig& c, const RunSettings& s) {
  const json& p = c.params;
  SuiteReport rep{c.id, c.kind, {}, {}};
  std::mt19937_64 rng(s.seed);
  const int N = s.order, bandwidth = p["bandwidth"];
  const json tol = p["tolerances"];
  auto t = [&](const char* key, double def) { return tol.value(key, def); };
  const double t_unit = t("unit", 1e-8), t_lead = t("leading", 1e-8), t_comm = t("commutator", 1e-6),
               t_assoc = t("associativity", 1e-6), t_agree = t("agreement", 1e-6);

  std::vector<std::array<std::string, 3>> triples;
  for (const auto& e : p["symbols"]) triples.push_back({e.at("a"), e.at("b"), e.value("c", std::string("1"))});
  for (int i = 0; i < static_cast<int>(p["pairs"]); ++i)
    triples.push_back({random_symbol_expression(rng, bandwidth), random_symbol_expression(rng, bandwidth),
                       random_symbol_expression(rng, bandwidth)});

  const SymbolGrid g = default_star_grid();
  const StarOptions opt = star_options(s);
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& [ta, tb, tc] = triples[i];
    const json in{{"a", ta}, {"b", tb}, {"c", tc}, {"order", N}};
    const std::string tag = "pair_" + std::to_string(i);
    const Symbol a = parse_symbol(ta), b = parse_symbol(tb), cc = parse_symbol(tc);
    GridSeries ab, ba;
    rep.checks.push_back(run_check(tag + ".unit", in, "exact", [&](CheckRecord& r) {
      const GridSeries u = star_numeric(a, Symbol::constant(1), N, g, opt);
      double d = sup(u.series.coeff(0) - a.sample(g));
      for (int n = 1; n <= N; ++n) d = std::max(d, sup(u.series.coeff(n)));
      r.measured = {{"max_deviation", d}};
      r.expected = {{"max_deviation", 0}, {"tol", t_unit}};
      r.pass = d <= t_unit;
    }));
    rep.checks.push_back(run_check(tag + ".leading", in, "exact", [&](CheckRecord& r) {
      ab = star_numeric(a, b, N, g, opt);
      const double d = sup(ab.series.coeff(0) - a.sample(g) * b.sample(g));
      r.measured = {{"deviation", d}, {"fit_residual", ab.residual}};
      r.expected = {{"deviation", 0}, {"tol", t_lead}};
      r.pass = d <= t_lead;
    }));
    rep.checks.push_back(run_check(tag + ".commutator", in, "oracle", [&](CheckRecord& r) {
      ba = star_numeric(b, a, N, g, opt);
      const GridFunction bracket =
          (star_coefficient_symbol(a, b, 1) - star_coefficient_symbol(b, a, 1)).sample(g);
      const double d = sup(ab.series.coeff(1) - ba.series.coeff(1) - bracket);
      r.measured = {{"deviation", d}};
      r.expected = {{"deviation", 0}, {"tol", t_comm}};
      r.pass = d <= t_comm;
    }));
    rep.checks.push_back(run_check(tag + ".associativity", in, "oracle", [&](CheckRecord& r) {
      const auto sab = star_series({a}, {b}, N), sbc = star_series({b}, {cc}, N);
      const auto left = star_series(sab, {cc}, N), right = star_series({a}, sbc, N);
      const GridSeries tri = star_numeric_triple(a, b, cc, N, g, opt);
      double formal = 0, numeric = 0;
      for (int n = 0; n <= N; ++n) {
        const GridFunction l = left[n].sample(g);
        formal = std::max(formal, sup(l - right[n].sample(g)));
        numeric = std::max(numeric, sup(tri.series.coeff(n) - l));
      }
      r.measured = {{"bracketings", formal}, {"numeric_triple", numeric}};
      r.expected = {{"deviation", 0}, {"tol", t_assoc}};
      r.pass = formal <= t_assoc && numeric <= t_assoc;
    }));
    rep.checks.push_back(run_check(tag + ".agreement", in, "oracle", [&](CheckRecord& r) {
      const auto ana = star_analytic(a, b, N, g);
      double d = 0;
      for (int n = 0; n <= N; ++n) d = std::max(d, sup(ab.series.coeff(n) - ana.coeff(n)));
      r.measured = {{"deviation", d}};
      r.expected = {{"deviation", 0}, {"tol", t_agree}};
      r.pass = d <= t_agree;
    }));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// egorov

constexpr double kVanishingResidual = 1e-12;

json default_egorov_configurations() {
  return json::array({
      {{"g_plus", "sine:0.3"}, {"b_plus", "exp(i*x)"}},
      {{"g_plus", "sine:0.2"}, {"g_minus", "sine:0.2"}},
      {{"g_plus", "rotation:0.7"}, {"g_minus", "rotation:0.7"}},
      {{"g_plus", "flow:0.2*cos(x)"}, {"g_minus", "sine:-0.25:1"}, {"b_minus", "exp(-i*x)"}},
      {{"route", "ode"}, {"h_plus", "0.3*sin(x)"}},
      {{"g_plus", "sine:0.25:2"}, {"g_minus", "rotation:0.4"}, {"b_minus", "exp(2*i*x)"}},
  });
}

SuiteReport run_egorov(const ExperimentConfig& c, const RunSettings& s) {
  const json& p = c.params;
  SuiteReport rep{c.id, c.kind, {}, {}};
  const json configs = p["configurations"].empty() ? default_egorov_configurations() : p["configurations"];
  const Symbol a = parse_symbol(p["symbol_a"].get<std::string>()), b = parse_symbol(p["symbol_b"].get<std::string>());
  const int N = p["order"];
  const double slope_min = p["slope_min"], lead_tol = p["leading_tol"], hom_tol = p["homomorphism_tol"];
  const SymbolGrid g = egorov_grid(p["nx"]);
  StarOptions opt = star_options(s);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const json in{{"fio", configs[i]}, {"a", p["symbol_a"]}, {"b", p["symbol_b"]}, {"order", N}};
    const std::string tag = "config_" + std::to_string(i);
    FourierIntegralOperator f;
    bool built = false;
    rep.checks.push_back(run_check(tag + ".residual", in, "oracle", [&](CheckRecord& r) {
      f = build_fio(configs[i], s.K, "/params/configurations/" + std::to_string(i));
      built = true;
      const auto res = egorov_residual(f, a, N, g, opt);
      // A residual at rounding level on the whole ladder (rotations) has no slope.
      const double largest = *std::max_element(res.sup_residual.begin(), res.sup_residual.end());
      const bool vanishes = largest <= kVanishingResidual;
      r.measured = {{"slope", res.slope},
                    {"residual_vanishes", vanishes},
                    {"leading_residual", res.leading_residual},
                    {"sup_residual", res.sup_residual}};
      r.expected = {{"slope_min", slope_min}, {"leading_tol", lead_tol}, {"vanishing_below", kVanishingResidual}};
      r.pass = (vanishes || res.slope >= slope_min) && res.leading_residual <= lead_tol;
    }));
    rep.checks.push_back(run_check(tag + ".homomorphism", in, "oracle", [&](CheckRecord& r) {
      if (!built) throw FioError("FIO construction failed");
      const auto h = egorov_homomorphism_check(f, a, b, N, g, opt);
      double worst = 0;
      for (double d : h.product_defect) worst = std::max(worst, d);
      for (double d : h.commutator_defect) worst = std::max(worst, d);
      r.measured = {{"product_defect", h.product_defect},
                    {"commutator_defect", h.commutator_defect},
                    {"bracket_transport", h.bracket_transport}};
      r.expected = {{"tol", hom_tol}};
      r.pass = worst <= hom_tol && h.bracket_transport <= hom_tol;
    }));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// index_match

SuiteReport run_index(const ExperimentConfig& c, const RunSettings& s) {
  const json& p = c.params;
  SuiteReport rep{c.id, c.kind, {}, {}};
  const double tol = p["integrality_tol"];

  // One-time orientation calibration on the m = 1 Toeplitz clutching.
  CharacteristicEvaluator ev;
  {
    const auto F = build_clutched_fio(CanonicalTransformation{}, winding_symbol(1), Symbol::constant(1), s.K);
    ev.orientation = calibrate_orientation(analytic_index(F).nearest_integer, compute_theta0_windings(F));
    rep.metadata["orientation"] = ev.orientation;
    rep.metadata["orientation_matches_frozen"] = ev.orientation == kIndexOrientation;
  }

  json configs = p["configurations"];
  if (configs.empty()) {
    for (const auto& gp : p["g_plus"])
      for (const auto& gm : p["g_minus"])
        for (const auto& mp : p["m_plus"])
          for (const auto& mm : p["m_minus"]) {
            const long a = mp.get<long>(), b = mm.get<long>();
            configs.push_back({{"g_plus", gp},
                               {"g_minus", gm},
                               {"b_plus", "exp(i*" + std::to_string(a) + "*x)"},
                               {"b_minus", "exp(i*" + std::to_string(b) + "*x)"}});
          }
  }
  std::vector<CheckRecord> records(configs.size());
  parallel_for(static_cast<int>(configs.size()), s.jobs, [&](int i) {
    records[i] = run_check("config_" + std::to_string(i), configs[i], "oracle", [&](CheckRecord& r) {
      const auto F = build_fio(configs[i], s.K, "/params/configurations/" + std::to_string(i));
      IndexReport idx = analytic_index(F);
      const GluedBundleModel gb = compute_theta0_windings(F);
      idx.attach_prediction(evaluate_index_formula(gb, ev), tol);
      r.measured = {{"tau_id", complex_json(idx.tau_id)},
                    {"nearest_integer", idx.nearest_integer},
                    {"integrality_gap", idx.integrality_gap},
                    {"route", idx.route},
                    {"w_plus", gb.w_plus},
                    {"w_minus", gb.w_minus},
                    {"winding_gap", gb.gap}};
      r.expected = {{"topological_prediction", *idx.topological_prediction}, {"integrality_tol", tol}};
      r.pass = idx.match;
    });
  });
  rep.checks = std::move(records);
  return rep;
}

// ---------------------------------------------------------------------------
// trace_space

SuiteReport run_trace_space(const ExperimentConfig& c, const RunSettings& s) {
  const json& p = c.params;
  SuiteReport rep{c.id, c.kind, {}, {}};
  const double tol = p["tol"];
  std::mt19937_64 rng(s.seed);
  const json decl = p["fio"];
  const auto F = build_fio(decl, s.K, "/params/fio");
  const int K = s.K;

  for (int i = 0; i < static_cast<int>(p["pairs"]); ++i) {
    const TracePair a = random_trace_pair(F.matrix, rng), b = random_trace_pair(F.matrix, rng);
    rep.checks.push_back(run_check("commutator_" + std::to_string(i), {{"fio", decl}, {"pair", i}}, "exact",
                                   [&](CheckRecord& r) {
                                     const double t = std::abs(regularized_trace(commutator(a, b)));
                                     r.measured = {{"abs_tau", t}};
                                     r.expected = {{"abs_tau", 0}, {"tol", tol}};
                                     r.pass = t <= tol;
                                   }));
  }
  for (int i = 0; i < static_cast<int>(p["residue_trials"]); ++i) {
    const std::string ta = "sqrt(1+xi^2)*(" + random_symbol_expression(rng, 1, 3) + ")";
    const std::string tb = random_symbol_expression(rng, 1, 3);
    rep.checks.push_back(run_check("residue_commutator_" + std::to_string(i), {{"a", ta}, {"b", tb}}, "exact",
                                   [&](CheckRecord& r) {
                                     const auto A = quantize<long double>(parse_symbol(ta, 1), K);
                                     const auto B = quantize<long double>(parse_symbol(tb), K);
                                     ResidueOptions ro;
                                     ro.order = 1;
                                     const auto res = wodzicki_residue(A * B - B * A, ro);
                                     r.measured = {{"abs_residue", std::abs(res.complex_value)}};
                                     r.expected = {{"abs_residue", 0}, {"tol", tol}};
                                     r.pass = std::abs(res.complex_value) <= tol;
                                   }));
  }
  rep.checks.push_back(run_check("independence", {{"fio", decl}}, "oracle", [&](CheckRecord& r) {
    const TraceSpaceReport t = trace_space_probe(F.matrix, rng, 0);
    r.measured = {{"compact_tau", complex_json(t.compact_tau)},
                  {"compact_residue", t.compact_residue},
                  {"tail_tau", complex_json(t.tail_tau)},
                  {"tail_residue", t.tail_residue},
                  {"residue_of_identity", t.tau1_identity}};
    r.expected = {{"compact_residue", 0}, {"tail_tau", 0}, {"tail_residue", 2}, {"residue_of_identity", 0}};
    r.pass = t.independent;
  }));
  return rep;
}

// ---------------------------------------------------------------------------
// residue

json default_residue_operators() {
  return json::array({
      {{"symbol", "(1+xi^2)^(-0.5)"}, {"order", -1}, {"expected", 2}},
      {{"symbol", "(3+cos(x))*chi(xi)*(1+xi^2)^(-0.5)"}, {"order", -1}, {"expected", 6}},
      {{"symbol", "(1-chi(0.5*xi))*cos(x)"}, {"order", 0}, {"expected", 0}},
      {{"symbol", "(2+sin(x))/(1+xi^2)"}, {"order", -2}, {"expected", 0}},
  });
}

SuiteReport run_residue(const ExperimentConfig& c, const RunSettings& s) {
  const json& p = c.params;
  SuiteReport rep{c.id, c.kind, {}, {}};
  const json ops = p["operators"].empty() ? default_residue_operators() : p["operators"];
  const double tol = p["tol"];
  for (std::size_t i = 0; i < ops.size(); ++i) {
    rep.checks.push_back(run_check("operator_" + std::to_string(i), ops[i], "exact", [&](CheckRecord& r) {
      const std::string field = "/params/operators/" + std::to_string(i);
      if (!ops[i].contains("symbol")) throw ConfigError(field + "/symbol", "missing");
      const double order = ops[i].value("order", 0.0);
      const double expected = ops[i].value("expected", 0.0);
      ResidueOptions ro;
      ro.order = order;
      const auto res = wodzicki_residue(quantize(parse_symbol(ops[i]["symbol"].get<std::string>(), order), s.K), ro);
      r.measured = {{"residue", complex_json(res.complex_value)}, {"fit_residual", res.fit_residual}};
      r.expected = {{"residue", expected}, {"tol", tol}};
      r.pass = std::abs(res.complex_value - expected) <= tol;
    }));
  }
  return rep;
}

std::vector<ExperimentKind> make_catalog() {
  std::vector<ExperimentKind> c;
  c.push_back({"weyl_identities", "Exact Fedosov-connection and bracket identities for random polynomial Hamiltonians",
               "lifted Hamiltonian derivations commute with the flat Weyl connection",
               {{"count", param("integer", 20, "number of random (H, K, w) triples")},
                {"max_degree", param("integer", 4, "total degree bound")},
                {"max_dim", param("integer", 2, "phase-space dimensions cycle through 1..max_dim")}},
               run_weyl});
  c.push_back({"star_product", "Lattice star product against the bidifferential expansion",
               "semiclassical composition of order-zero symbols on the cylinder",
               {{"pairs", param("integer", 10, "random symbol triples")},
                {"bandwidth", param("integer", 1, "largest x-mode of random symbols")},
                {"symbols", param("array", json::array(), "explicit {a, b, c} expressions")},
                {"tolerances", param("object", json::object(),
                                     "unit, leading, commutator, associativity, agreement")}},
               run_star});
  c.push_back({"egorov", "Conjugation of quantized symbols by clutched and ODE-route FIOs",
               "Egorov theorem for FIOs associated with homogeneous canonical transformations",
               {{"configurations", param("array", json::array(), "FIO declarations; empty selects six defaults")},
                {"symbol_a", param("string", "chi(4*xi)*(cos(x)+2+0.5*sin(2*x))*atan(xi)", "conjugated symbol")},
                {"symbol_b", param("string", "chi(4*xi)*exp(i*x)/(1+0.1*xi^2)", "second symbol for products")},
                {"order", param("integer", 2, "hbar order")},
                {"nx", param("integer", 32, "x samples of the verification grid")},
                {"slope_min", param("number", 0.9, "minimal log-log slope of the residual")},
                {"leading_tol", param("number", 1e-6, "leading coefficient tolerance")},
                {"homomorphism_tol", param("number", 1e-5, "product and commutator defect tolerance")}},
               run_egorov});
  c.push_back({"index_match", "Analytic index tau(Id, Id) against the winding-number index formula",
               "index of an FIO as the integral of e^theta A-hat over the glued manifold",
               {{"m_plus", param("array", json::array({-2, -1, 0, 1, 2}), "windings of b_plus")},
                {"m_minus", param("array", json::array({0}), "windings of b_minus")},
                {"g_plus", param("array", json::array({"id"}), "diffeomorphisms on xi > 0")},
                {"g_minus", param("array", json::array({"id"}), "diffeomorphisms on xi < 0")},
                {"configurations", param("array", json::array(), "explicit FIO declarations; overrides the grid")},
                {"integrality_tol", param("number", 1e-6, "allowed distance of tau(Id, Id) from an integer")}},
               run_index});
  c.push_back({"trace_space", "Regularized trace and residue on commutators, with independence witnesses",
               "the regularized trace on pairs coupled by an FIO",
               {{"pairs", param("integer", 20, "random trace pairs")},
                {"residue_trials", param("integer", 2, "random order-one commutators for the residue")},
                {"fio", param("object", json{{"g_plus", "sine:0.3"}, {"b_plus", "exp(i*x)"}}, "coupling FIO")},
                {"tol", param("number", 1e-6, "tolerance")}},
               run_trace_space});
  c.push_back({"residue", "Wodzicki residue of quantized classical symbols",
               "the noncommutative residue as a trace on the boundary",
               {{"operators", param("array", json::array(), "{symbol, order, expected}; empty selects defaults")},
                {"tol", param("number", 1e-6, "tolerance")}},
               run_residue});
  return c;
}

std::string iso_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

// ---------------------------------------------------------------------------

std::string CheckRecord::inputs_digest() const {
  // FNV-1a over the canonical dump; stable across runs and platforms.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : inputs.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool SuiteReport::pass() const {
  for (const auto& r : checks)
    if (!r.pass) return false;
  return true;
}

bool RunReport::pass() const {
  for (const auto& s : suites)
    if (!s.pass()) return false;
  return true;
}

const std::vector<ExperimentKind>& experiment_catalog() {
  static const std::vector<ExperimentKind> catalog = make_catalog();
  return catalog;
}

const ExperimentKind& find_experiment(const std::string& name, const std::string& field) {
  for (const auto& k : experiment_catalog())
    if (k.name == name) return k;
  throw ConfigError(field, "unknown experiment kind '" + name + "'");
}

CircleDiffeo parse_diffeo(const std::string& text) {
  auto split = [&text]() {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    return parts;
  };
  if (text == "id" || text == "identity") return CircleDiffeo::identity();
  if (text.rfind("sine:", 0) == 0) {
    const auto parts = split();
    return CircleDiffeo::sine(std::stod(parts.at(1)), parts.size() > 2 ? std::stod(parts[2]) : 0.0);
  }
  if (text.rfind("rotation:", 0) == 0) return CircleDiffeo::rotation(std::stod(text.substr(9)));
  if (text.rfind("flow:", 0) == 0) return CircleDiffeo::flow(CircleFunction::parse(text.substr(5)));
  const CircleFunction f = CircleFunction::parse(text);
  CircleDiffeo g{f.f, f.df, {}, text};
  // Must lift a degree-one circle map.
  for (double x : {0.0, 1.0, 2.5, 4.0})
    if (std::abs(g(x + 2 * std::numbers::pi) - g(x) - 2 * std::numbers::pi) > 1e-9)
      throw FioError("'" + text + "' is not a lift of a circle diffeomorphism");
  return g;
}

FourierIntegralOperator build_fio(const json& decl, int K, const std::string& field) {
  if (!decl.is_object()) throw ConfigError(field, "FIO declaration must be an object");
  const std::string route = decl.value("route", std::string("clutched"));
  auto str = [&](const char* key, const char* def) {
    if (!decl.contains(key)) return std::string(def);
    if (!decl[key].is_string()) throw ConfigError(field + "/" + key, "expected string");
    return decl[key].get<std::string>();
  };
  auto wrap = [&](const char* key, auto&& fn) {
    try {
      return fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(field + "/" + key, e.what());
    }
  };
  if (route == "clutched") {
    for (const auto& [key, v] : decl.items())
      if (key != "route" && key != "g_plus" && key != "g_minus" && key != "b_plus" && key != "b_minus")
        throw ConfigError(field + "/" + key, "unknown FIO field");
    CanonicalTransformation ct;
    ct.plus = wrap("g_plus", [&] { return parse_diffeo(str("g_plus", "id")); });
    ct.minus = wrap("g_minus", [&] { return parse_diffeo(str("g_minus", "id")); });
    const Symbol bp = wrap("b_plus", [&] { return parse_symbol(str("b_plus", "1")); });
    const Symbol bm = wrap("b_minus", [&] { return parse_symbol(str("b_minus", "1")); });
    return build_clutched_fio(ct, bp, bm, K);
  }
  if (route == "ode") {
    for (const auto& [key, v] : decl.items())
      if (key != "route" && key != "h_plus" && key != "h_minus") throw ConfigError(field + "/" + key, "unknown FIO field");
    HomogeneousHamiltonian H;
    H.h_plus = wrap("h_plus", [&] { return CircleFunction::parse(str("h_plus", "0")); });
    H.h_minus = wrap("h_minus", [&] { return CircleFunction::parse(str("h_minus", "0")); });
    return build_ode_fio(H, K);
  }
  throw ConfigError(field + "/route", "expected 'clutched' or 'ode'");
}

SuiteConfig parse_suite_config(const json& j) {
  if (!j.is_object()) throw ConfigError("", "configuration must be an object");
  for (const auto& [key, v] : j.items())
    if (key != "settings" && key != "experiments") throw ConfigError("/" + key, "unknown top-level field");
  SuiteConfig cfg;
  if (j.contains("settings")) {
    const json& s = j["settings"];
    if (!s.is_object()) throw ConfigError("/settings", "must be an object");
    for (const auto& [key, v] : s.items()) {
      const std::string f = "/settings/" + key;
      if (key == "K") {
        if (!v.is_number_integer() || v.get<int>() < 8) throw ConfigError(f, "expected an integer >= 8");
        cfg.settings.K = v;
      } else if (key == "hbar_ladder") {
        if (!v.is_array() || v.size() < 3) throw ConfigError(f, "expected an array of at least 3 numbers");
        std::vector<double> h;
        for (const auto& e : v) {
          if (!e.is_number() || !(e.get<double>() > 0)) throw ConfigError(f, "entries must be positive numbers");
          h.push_back(e);
        }
        for (std::size_t i = 1; i < h.size(); ++i)
          if (!(h[i] < h[i - 1])) throw ConfigError(f, "must be strictly decreasing");
        cfg.settings.hbar_ladder = h;
      } else if (key == "order") {
        if (!v.is_number_integer() || v.get<int>() < 0) throw ConfigError(f, "expected a non-negative integer");
        cfg.settings.order = v;
      } else if (key == "seed") {
        if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(f, "expected a non-negative integer");
        cfg.settings.seed = v.get<std::uint64_t>();
      } else if (key == "jobs") {
        if (!v.is_number_integer() || v.get<int>() < 1) throw ConfigError(f, "expected a positive integer");
        cfg.settings.jobs = v;
      } else {
        throw ConfigError(f, "unknown setting");
      }
    }
  }
  if (j.contains("experiments")) {
    const json& ex = j["experiments"];
    if (!ex.is_array()) throw ConfigError("/experiments", "must be an array");
    for (std::size_t i = 0; i < ex.size(); ++i) {
      const std::string f = "/experiments/" + std::to_string(i);
      const json& e = ex[i];
      if (!e.is_object()) throw ConfigError(f, "must be an object");
      for (const auto& [key, v] : e.items())
        if (key != "id" && key != "kind" && key != "params") throw ConfigError(f + "/" + key, "unknown field");
      if (!e.contains("kind") || !e["kind"].is_string()) throw ConfigError(f + "/kind", "missing or not a string");
      ExperimentConfig c;
      c.kind = e["kind"];
      const ExperimentKind& kind = find_experiment(c.kind, f + "/kind");
      c.id = e.contains("id") ? e["id"].get<std::string>() : c.kind + "_" + std::to_string(i);
      for (const auto& prev : cfg.experiments)
        if (prev.id == c.id) throw ConfigError(f + "/id", "duplicate id '" + c.id + "'");
      c.params = fill_params(e.value("params", json::object()), kind.schema, f + "/params");
      cfg.experiments.push_back(std::move(c));
    }
  }
  return cfg;
}

SuiteConfig load_suite_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("(syntax)", "line " + std::to_string(line) + " column " + std::to_string(col) + ": " + e.what());
  }
  return parse_suite_config(j);
}

RunReport run_suite(const SuiteConfig& config) {
  RunReport report;
  report.settings = config.settings;
  report.generated_at = iso_now();
  const int n = static_cast<int>(config.experiments.size());
  report.suites.resize(n);
  const int pool = std::min(config.settings.jobs, std::max(n, 1));
  RunSettings inner = config.settings;
  inner.jobs = std::max(1, config.settings.jobs / std::max(pool, 1));
  parallel_for(n, pool, [&](int i) {
    const ExperimentConfig& e = config.experiments[i];
    RunSettings s = inner;
    s.seed = config.settings.seed + static_cast<std::uint64_t>(i);
    try {
      report.suites[i] = find_experiment(e.kind).run(e, s);
    } catch (const std::exception& ex) {
      SuiteReport failed{e.id, e.kind, {}, {}};
      CheckRecord r;
      r.name = "setup";
      r.measured["error"] = ex.what();
      failed.checks.push_back(r);
      report.suites[i] = failed;
    }
  });
  return report;
}

json report_to_json(const RunReport& report) {
  json j;
  j["environment"] = {{"version", "1.0.0"},
                      {"K", report.settings.K},
                      {"hbar_ladder", report.settings.hbar_ladder},
                      {"order", report.settings.order},
                      {"seed", report.settings.seed}};
  json suites = json::array(), timing = json::object();
  std::size_t total = 0, passed = 0;
  for (const auto& s : report.suites) {
    json checks = json::array();
    for (const auto& r : s.checks) {
      checks.push_back({{"name", r.name},
                        {"inputs_digest", r.inputs_digest()},
                        {"inputs", r.inputs},
                        {"measured", r.measured},
                        {"expected", r.expected},
                        {"provenance", r.provenance},
                        {"pass", r.pass}});
      timing[s.id + "/" + r.name] = r.runtime;
      ++total;
      passed += r.pass ? 1 : 0;
    }
    suites.push_back({{"id", s.id},
                      {"kind", s.kind},
                      {"metadata", s.metadata},
                      {"checks", checks},
                      {"summary", {{"checks", s.checks.size()}, {"pass", s.pass()}}}});
  }
  j["suites"] = suites;
  j["summary"] = {{"checks", total}, {"passed", passed}, {"pass", report.pass()}};
  j["timing"] = {{"generated_at", report.generated_at}, {"seconds", timing}};
  return j;
}

std::string suite_csv(const SuiteReport& suite) {
  std::string out = "suite,check,provenance,pass,inputs_digest,measured,expected\n";
  for (const auto& r : suite.checks)
    out += suite.id + "," + r.name + "," + r.provenance + "," + (r.pass ? "true" : "false") + "," +
           r.inputs_digest() + "," + csv_quote(r.measured.dump()) + "," + csv_quote(r.expected.dump()) + "\n";
  return out;
}

void write_report(const RunReport& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ofstream(std::filesystem::path(out_dir) / "report.json") << report_to_json(report).dump(2) << "\n";
  for (const auto& s : report.suites) std::ofstream(std::filesystem::path(out_dir) / (s.id + ".csv")) << suite_csv(s);
}

}  // namespace fioindex
