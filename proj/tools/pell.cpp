// pell: command-line front end.
//
// Exit codes: 0 success, 1 refuted or empty range (output still valid),
// 2 input error, 3 numerical failure.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pell/json_io.hpp"
#include "pell/pell.hpp"

namespace {

using pell::io::json;

constexpr const char* kVersion = "0.1.0";
constexpr int kExitOk = 0;
constexpr int kExitRefuted = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr double kInconclusiveBand = 1e-9;

struct Common {
  bool omit_duration = false;
};

struct Outcome {
  json result;
  int code = kExitOk;
};

json cplx_list(std::span<const pell::cplx> v) {
  json out = json::array();
  for (const auto& z : v) out.push_back({z.real(), z.imag()});
  return out;
}

json witness_json(const pell::Witness& w) {
  if (const auto* s = std::get_if<pell::StrongWitness>(&w)) {
    json xi = json::array();
    for (int h = 0; h < s->xi.n(); ++h) {
      std::vector<pell::cplx> row;
      for (int a = 0; a < s->xi.m(); ++a) row.push_back(s->xi(h, a));
      xi.push_back(cplx_list(row));
    }
    return json{{"xi", xi}, {"omega", cplx_list(s->omega.components())}};
  }
  const auto& l = std::get<pell::LhWitness>(w);
  return json{{"eta", cplx_list(l.eta)}, {"omega", cplx_list(l.omega.components())}, {"q", l.q}};
}

json margin_json(const pell::MarginResult& r, std::optional<std::size_t> sample) {
  json j{{"value", r.value},
         {"evaluations", r.evaluations},
         {"certified", r.certified},
         {"witness", witness_json(r.witness)}};
  if (sample) j["sample"] = *sample;
  return j;
}

pell::TestField parse_field(const std::string& s) {
  if (s == "real") return pell::TestField::real;
  if (s == "complex") return pell::TestField::complex;
  return pell::TestField::automatic;
}

pell::ConditionKind parse_kind(const std::string& s) {
  return s == "lh" ? pell::ConditionKind::legendre_hadamard : pell::ConditionKind::strong;
}

pell::TensorField load_field(const std::string& path) {
  const std::string source = path == "-" ? "<stdin>" : path;
  const json doc = pell::io::parse_text(pell::io::read_source(path), source);
  try {
    return pell::io::field_from_json(doc);
  } catch (const pell::InputError& e) {
    throw pell::InputError(source + ": " + e.what());
  }
}

// Minimum of a margin over all samples of a field.
template <class Fn>
std::pair<pell::MarginResult, std::optional<std::size_t>> worst_over_field(const pell::TensorField& f, Fn&& fn) {
  if (f.is_constant()) return {fn(f.sample(0)), std::nullopt};
  std::optional<pell::MarginResult> best;
  std::size_t where = 0;
  for (std::size_t i = 0; i < f.sample_count(); ++i) {
    auto r = fn(f.sample(i));
    if (!best || r.value < best->value) best = std::move(r), where = i;
  }
  return {std::move(*best), where};
}

struct CheckOptions {
  std::string input;
  double p = 2.0;
  std::string kind = "all";
  std::uint64_t seed = 0;
  int starts = 64;
  std::string field = "auto";
};

Outcome run_check(const CheckOptions& o) {
  const pell::TensorField f = load_field(o.input);
  pell::SearchConfig cfg;
  cfg.t = pell::t_of_p(o.p);
  cfg.seed = o.seed;
  cfg.outer_starts = o.starts;
  cfg.field = parse_field(o.field);

  json result{{"p", o.p}, {"t", cfg.t}, {"n", f.n()}, {"m", f.m()}};
  std::optional<double> deciding;
  if (o.kind == "all" || o.kind == "strong") {
    auto [r, s] = worst_over_field(f, [&](const auto& a) { return pell::strong_margin(a, cfg); });
    result["strong"] = margin_json(r, s);
    deciding = r.value;
  }
  if (o.kind == "all" || o.kind == "lh") {
    auto [r, s] = worst_over_field(f, [&](const auto& a) { return pell::lh_margin(a, cfg); });
    result["lh"] = margin_json(r, s);
    if (!deciding) deciding = r.value;
  }
  if (f.m() == 1) {
    double v = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.sample_count(); ++i) v = std::min(v, pell::scalar_p_margin(f.sample(i), o.p));
    result["scalar"] = v;
  }
  const char* label = o.kind == "lh" ? "lh-p-elliptic" : "strong-p-elliptic";
  Outcome out;
  if (std::abs(*deciding) <= kInconclusiveBand) {
    result["classification"] = "inconclusive";
  } else if (*deciding > 0.0) {
    result["classification"] = label;
  } else {
    result["classification"] = "refuted";
    out.code = kExitRefuted;
  }
  out.result = std::move(result);
  return out;
}

struct RangeOptions {
  std::string input;
  std::string kind = "strong";
  std::uint64_t seed = 0;
  int starts = 64;
  std::string field = "auto";
};

Outcome run_range(const RangeOptions& o) {
  const pell::TensorField f = load_field(o.input);
  pell::SearchConfig cfg;
  cfg.seed = o.seed;
  cfg.outer_starts = o.starts;
  cfg.field = parse_field(o.field);
  const pell::PRange r = pell::field_range(f, parse_kind(o.kind), cfg);
  Outcome out{pell::io::range_to_json(r), r.empty ? kExitRefuted : kExitOk};
  out.result["kind"] = o.kind;
  return out;
}

struct LameOptions {
  int n = 2;
  std::optional<double> lambda, mu;
  std::string field_file;
  std::optional<double> mu0, K;
};

json lame_sufficiency_json(const pell::LameSufficiency& s) {
  return json{{"C_lower", s.C_lower},
              {"C_upper", s.C_upper},
              {"gamma_star", s.gamma_star},
              {"r_star", s.r_star},
              {"branch", pell::to_string(s.branch)},
              {"p_interval", pell::io::range_to_json(s.p_interval)}};
}

std::vector<double> number_list(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_array()) throw pell::InputError(std::string("missing array \"") + key + "\"");
  std::vector<double> out;
  for (const auto& v : doc.at(key)) {
    if (!v.is_number()) throw pell::InputError(std::string("\"") + key + "\" must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

// Lame field file: {"schema": 1, "n": n, "lambda": [...], "mu": [...],
// optional "points": [[x...]...] and "delta": [...] for the oscillation scan}.
Outcome run_lame(const LameOptions& o) {
  std::vector<double> lambdas, mus;
  std::vector<std::vector<double>> points;
  std::vector<double> delta;
  int n = o.n;
  if (!o.field_file.empty()) {
    const std::string source = o.field_file == "-" ? "<stdin>" : o.field_file;
    const json doc = pell::io::parse_text(pell::io::read_source(o.field_file), source);
    try {
      if (!doc.is_object()) throw pell::InputError("top-level JSON value must be an object");
      if (doc.contains("n")) n = doc.at("n").get<int>();
      lambdas = number_list(doc, "lambda");
      mus = number_list(doc, "mu");
      if (doc.contains("points")) points = doc.at("points").get<std::vector<std::vector<double>>>();
      if (doc.contains("delta")) delta = number_list(doc, "delta");
    } catch (const json::exception& e) {
      throw pell::InputError(source + ": " + e.what());
    } catch (const pell::InputError& e) {
      throw pell::InputError(source + ": " + e.what());
    }
  } else {
    if (!o.lambda || !o.mu) throw pell::InputError("lame: give --lambda and --mu, or --field");
    lambdas = {*o.lambda};
    mus = {*o.mu};
  }

  const pell::LameSufficiency s = pell::sufficient_constant_field(n, lambdas, mus);
  json result = lame_sufficiency_json(s);
  result["n"] = n;
  double necessary = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lambdas.size(); ++i)
    necessary = std::min(necessary, pell::necessary_constant(n, lambdas[i], mus[i]));
  result["necessary"] = necessary;
  if (lambdas.size() == 1 && n >= 3) result["cubic_roots"] = pell::lame_cubic_roots(n, lambdas[0], mus[0]);
  if (o.mu0) {
    const auto a = pell::admissibility(lambdas, mus, *o.mu0);
    json adm{{"admissible", a.admissible}, {"inf_expression", a.inf_expression}, {"poisson_defined", a.poisson_defined}};
    if (a.poisson_defined) adm["poisson_max"] = a.poisson_max;
    adm["poisson_below_0_396"] = a.poisson_below;
    result["admissibility"] = std::move(adm);
  }
  if (!delta.empty()) {
    if (!o.K) throw pell::InputError("lame: the oscillation scan needs --K");
    const auto scan = pell::oscillation_scan(lambdas, mus, points, delta, *o.K);
    result["oscillation"] = json{{"max_sum", scan.max_sum},
                                 {"argmax", scan.argmax},
                                 {"passes", scan.passes},
                                 {"K", *o.K},
                                 {"isolated", scan.isolated}};
  }
  return {std::move(result), kExitOk};
}

struct SolvabilityOptions {
  std::string theorem;
  int n = 3;
  int m = 2;
  std::optional<double> q, q_strong, lambda, mu, drift_bound;
  std::string p0 = "inf";
  bool worst_case = false;
  int grid = 10000;
};

json interval_json(const pell::PInterval& i) {
  if (i.empty) return json{{"empty", true}};
  return json{{"empty", false},
              {"lo", pell::io::number_or_inf(i.lo)},
              {"hi", pell::io::number_or_inf(i.hi)},
              {"lo_closed", i.lo_closed},
              {"hi_closed", i.hi_closed}};
}

json report_json(const pell::SolvabilityReport& r) {
  json parts = json::object();
  for (const auto& [name, iv] : r.parts) parts[name] = interval_json(iv);
  json j{{"theorem", pell::to_string(r.theorem)}, {"range", interval_json(r.range)}, {"notes", r.notes}};
  if (!r.parts.empty()) j["parts"] = std::move(parts);
  return j;
}

double parse_p0(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw pell::InputError("--p0: expected a number or \"inf\", got " + text);
  return v;
}

Outcome run_solvability(const SolvabilityOptions& o) {
  if (o.theorem == "extrapolation") {
    if (!o.q) throw pell::InputError("extrapolation needs --q");
    const double p0 = parse_p0(o.p0);
    return {report_json(pell::extrapolation_range({o.n, *o.q, p0, o.drift_bound})), kExitOk};
  }
  if (o.theorem == "homogenization") {
    if (!o.q_strong) throw pell::InputError("homogenization needs --q-strong");
    return {report_json(pell::homogenization_range(o.n, o.m, *o.q_strong)), kExitOk};
  }
  // lame-corollary
  if (o.worst_case) {
    const auto w = pell::worst_case_over_ratio(o.n, 1.0 - std::sqrt(8.0), 1.0 + std::sqrt(8.0), o.grid);
    pell::SolvabilityReport r;
    r.theorem = pell::Theorem::lame_corollary;
    r.range = pell::PInterval::open(2.0, w.p_up_star);
    r.notes.push_back("worst case over 1 - sqrt 8 < lambda/mu < 1 + sqrt 8 on an interior grid");
    r.notes.push_back(pell::kCorollaryDisplayNote);
    json j = report_json(r);
    j["worst_case"] = json{{"a_star", w.a_star},
                           {"C_star", w.C_star},
                           {"p_up", pell::io::number_or_inf(w.p_up_star)},
                           {"asymptotic", pell::io::number_or_inf(w.asymptotic)},
                           {"asymptotic_constant", pell::lame_asymptotic_constant()},
                           {"grid_points", o.grid}};
    return {std::move(j), kExitOk};
  }
  if (!o.lambda || !o.mu) throw pell::InputError("lame-corollary needs --lambda and --mu, or --worst-case");
  json j = report_json(pell::lame_corollary_range(o.n, *o.lambda, *o.mu));
  j["p_up"] = pell::io::number_or_inf(pell::lame_dirichlet_upper(o.n, *o.lambda, *o.mu));
  return {std::move(j), kExitOk};
}

struct FalsifyOptions {
  std::string input;
  double p = 2.0;
  int trials = 500;
  std::uint64_t seed = 0;
  int grid = 33;
};

Outcome run_falsify(const FalsifyOptions& o) {
  const pell::TensorField f = load_field(o.input);
  const auto hit = pell::falsify_integral(f, o.p, o.trials, o.seed, o.grid);
  json result{{"p", o.p}, {"trials", o.trials}, {"found", static_cast<bool>(hit)}};
  if (!hit) {
    result["note"] = "no counterexample found; this does not prove the integral condition";
    return {std::move(result), kExitOk};
  }
  result["counterexample"] = json{{"quotient", hit->quotient},
                                  {"p", hit->p},
                                  {"seed", hit->seed},
                                  {"trial", hit->trial},
                                  {"trial_seed", hit->trial_seed},
                                  {"family", hit->family == pell::TestFamily::sine_sum ? "sine-sum" : "oscillation"},
                                  {"n", hit->v.n},
                                  {"m", hit->v.m},
                                  {"N", hit->v.N},
                                  {"values", cplx_list(hit->v.values)}};
  return {std::move(result), kExitRefuted};
}

template <class Fn>
int emit(const std::string& command, const json& config, std::uint64_t seed, const Common& common, Fn&& run) {
  const auto start = std::chrono::steady_clock::now();
  try {
    Outcome out = run();
    json manifest{{"command", command}, {"config", config}, {"seed", seed}, {"version", kVersion}};
    if (!common.omit_duration) {
      const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      manifest["duration_ms"] = ms;
    }
    std::cout << json{{"manifest", manifest}, {"result", out.result}}.dump(2) << "\n";
    return out.code;
  } catch (const pell::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const pell::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << " (best value " << e.best_value() << " after "
              << e.evaluations() << " evaluations)\n";
    return kExitNumerical;
  } catch (const pell::InconsistencyError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const pell::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  }
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-ellipticity of elliptic systems: margins, p-ranges, Lame constants, solvability ranges"};
  app.require_subcommand(1);
  Common common;
  app.add_flag("--omit-duration", common.omit_duration, "Leave duration_ms out of the manifest (byte-stable output)");

  CheckOptions check;
  auto* c = app.add_subcommand("check", "Margins of the pointwise conditions at one p");
  c->add_option("input", check.input, "Tensor or field JSON file ('-' for stdin)")->required();
  c->add_option("--p", check.p, "Exponent p > 1")->required();
  c->add_option("--kind", check.kind, "strong, lh, or all")->check(CLI::IsMember({"strong", "lh", "all"}));
  c->add_option("--seed", check.seed, "Search seed");
  c->add_option("--starts", check.starts, "Random starts of the outer search")->check(CLI::PositiveNumber);
  c->add_option("--field", check.field, "Test objects: auto, real, complex")
      ->check(CLI::IsMember({"auto", "real", "complex"}));

  RangeOptions range;
  auto* r = app.add_subcommand("range", "Interval of p on which a pointwise condition holds");
  r->add_option("input", range.input, "Tensor or field JSON file ('-' for stdin)")->required();
  r->add_option("--kind", range.kind, "strong or lh")->check(CLI::IsMember({"strong", "lh"}));
  r->add_option("--seed", range.seed, "Search seed");
  r->add_option("--starts", range.starts, "Random starts of the outer search")->check(CLI::PositiveNumber);
  r->add_option("--field", range.field, "Test objects: auto, real, complex")
      ->check(CLI::IsMember({"auto", "real", "complex"}));

  LameOptions lame;
  auto* l = app.add_subcommand("lame", "Lame p-ellipticity constants");
  l->add_option("--n", lame.n, "Spatial dimension (>= 2)");
  l->add_option("--lambda", lame.lambda, "First Lame modulus");
  l->add_option("--mu", lame.mu, "Shear modulus");
  l->add_option("--field", lame.field_file, "Sampled moduli JSON file ('-' for stdin)");
  l->add_option("--mu0", lame.mu0, "Admissibility threshold mu0 > 0");
  l->add_option("--K", lame.K, "Oscillation bound for the scan");

  SolvabilityOptions solv;
  auto* s = app.add_subcommand("solvability", "Dirichlet solvability ranges");
  s->add_option("--theorem", solv.theorem, "extrapolation, homogenization, lame-corollary")
      ->required()
      ->check(CLI::IsMember({"extrapolation", "homogenization", "lame-corollary"}));
  s->add_option("--n", solv.n, "Spatial dimension");
  s->add_option("--m", solv.m, "System size");
  s->add_option("--q", solv.q, "Known solvable exponent");
  s->add_option("--p0", solv.p0, "Supremal p-ellipticity exponent (number or inf)");
  s->add_option("--q-strong", solv.q_strong, "Supremal strong p-ellipticity exponent");
  s->add_option("--lambda", solv.lambda, "Lame lambda");
  s->add_option("--mu", solv.mu, "Lame mu");
  s->add_option("--drift-bound", solv.drift_bound, "First-order term bound K (informational)");
  s->add_flag("--worst-case", solv.worst_case, "Worst case over admissible lambda/mu");
  s->add_option("--grid", solv.grid, "Grid points for --worst-case")->check(CLI::Range(100, 10000000));

  FalsifyOptions fal;
  auto* f = app.add_subcommand("falsify", "Random search for a violation of the integral condition");
  f->add_option("input", fal.input, "Tensor or field JSON file ('-' for stdin)")->required();
  f->add_option("--p", fal.p, "Exponent p > 1")->required();
  f->add_option("--trials", fal.trials, "Number of random test functions")->check(CLI::PositiveNumber);
  f->add_option("--seed", fal.seed, "Seed");
  f->add_option("--grid", fal.grid, "Lattice points per axis")->check(CLI::Range(8, 65));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  if (c->parsed()) {
    json cfg{{"input", check.input}, {"p", check.p}, {"kind", check.kind}, {"starts", check.starts}, {"field", check.field}};
    return emit("check", cfg, check.seed, common, [&] { return run_check(check); });
  }
  if (r->parsed()) {
    json cfg{{"input", range.input}, {"kind", range.kind}, {"starts", range.starts}, {"field", range.field}};
    return emit("range", cfg, range.seed, common, [&] { return run_range(range); });
  }
  if (l->parsed()) {
    json cfg{{"n", lame.n},         {"lambda", optional_json(lame.lambda)}, {"mu", optional_json(lame.mu)},
             {"field", lame.field_file}, {"mu0", optional_json(lame.mu0)},   {"K", optional_json(lame.K)}};
    return emit("lame", cfg, 0, common, [&] { return run_lame(lame); });
  }
  if (s->parsed()) {
    json cfg{{"theorem", solv.theorem},
             {"n", solv.n},
             {"m", solv.m},
             {"q", optional_json(solv.q)},
             {"p0", solv.p0},
             {"q_strong", optional_json(solv.q_strong)},
             {"lambda", optional_json(solv.lambda)},
             {"mu", optional_json(solv.mu)},
             {"drift_bound", optional_json(solv.drift_bound)},
             {"worst_case", solv.worst_case},
             {"grid", solv.grid}};
    return emit("solvability", cfg, 0, common, [&] { return run_solvability(solv); });
  }
  json cfg{{"input", fal.input}, {"p", fal.p}, {"trials", fal.trials}, {"grid", fal.grid}};
  return emit("falsify", cfg, fal.seed, common, [&] { return run_falsify(fal); });
}
