// neumann_lab: run truncation experiments on weighted graphs and write reports.
//
//   neumann_lab run --model comb --experiment comb-beta --depth 40
//   neumann_lab run --model bd:unit --experiment classify --horizon 1000
//   neumann_lab run --model comb --experiment neumann-convergence --truncations 2..8 --out comb
//
// Exit codes: 0 ok, 1 input error, 2 truncation insufficient, 3 undetermined
// classification, 4 a numerically checked invariant failed.

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "neumann_lab/neumann_lab.hpp"

using namespace nlab;

namespace {

struct Config {
  std::string model;
  std::string experiment;
  double t = 1.0;
  double alpha = 1.0;
  int horizon = 1000;
  std::string truncations;
  std::optional<std::int64_t> reference;
  double reference_factor = 4.0;
  double tol = 1e-8;
  std::string out;
  std::uint64_t seed = 1;
  std::vector<std::string> certify;
  bool no_symbolic = false;
  int depth = 40;
  int height = 6;
  std::string vertex;
  std::string rate_expr, measure_expr;
  std::string dump_matrix;
  std::string restriction = "dirichlet";
  int grid = 64;
};

enum Exit { kOk = 0, kInput = 1, kTruncation = 2, kUndetermined = 3, kInvariant = 4 };

const std::vector<std::string> kExperiments{"neumann-convergence", "dirichlet-gap", "l1-defect",
                                            "feller",  "gap",    "classify",
                                            "comb-beta", "uniform-l1", "ec"};

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// "a..b[:step]" or "a,b,c".
std::vector<std::int64_t> parse_truncations(const std::string& text) {
  std::vector<std::int64_t> out;
  try {
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
      const auto colon = text.find(':', dots);
      const std::int64_t a = std::stoll(text.substr(0, dots));
      const std::int64_t b = std::stoll(text.substr(dots + 2, colon == std::string::npos ? std::string::npos : colon - dots - 2));
      const std::int64_t step = colon == std::string::npos ? 1 : std::stoll(text.substr(colon + 1));
      if (step < 1 || b < a) throw ParameterError("empty truncation range \"" + text + "\"");
      for (std::int64_t t = a; t <= b; t += step) out.push_back(t);
    } else {
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(std::stoll(item));
    }
  } catch (const std::invalid_argument&) {
    throw ParameterError("cannot parse truncations \"" + text + "\"");
  } catch (const std::out_of_range&) {
    throw ParameterError("cannot parse truncations \"" + text + "\"");
  }
  if (out.empty()) throw ParameterError("no truncations given");
  return out;
}

std::vector<std::int64_t> default_truncations(const Model& m) {
  switch (m.family) {
    case Family::Comb: return parse_truncations("2..8");
    case Family::Chain: return parse_truncations("10..50:10");
    case Family::Finite: {
      std::vector<std::int64_t> out;
      for (std::int64_t r = 0; r <= max_truncation(m); ++r) out.push_back(r);
      return out;
    }
  }
  return {};
}

VertexId parse_vertex(const Model& m, const std::string& text) {
  if (text.empty()) return m.root;
  if (m.family == Family::Comb) {
    std::string s = text;
    for (char& c : s)
      if (c == '(' || c == ')') c = ' ';
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw ParameterError("comb vertices are given as k,n");
    return comb_id(std::stoll(s.substr(0, comma)), std::stoll(s.substr(comma + 1)));
  }
  try {
    return std::stoll(text);
  } catch (const std::exception&) {
    throw ParameterError("cannot parse vertex \"" + text + "\"");
  }
}

Restriction parse_restriction(const std::string& s) {
  if (s == "dirichlet") return Restriction::Dirichlet;
  if (s == "neumann") return Restriction::Neumann;
  throw ParameterError("restriction must be dirichlet or neumann");
}

Json config_json(const Config& c) {
  Json j;
  j["model"] = c.model;
  j["experiment"] = c.experiment;
  j["t"] = c.t;
  j["alpha"] = c.alpha;
  j["horizon"] = c.horizon;
  j["truncations"] = c.truncations;
  j["reference"] = c.reference ? Json(*c.reference) : Json(nullptr);
  j["reference_factor"] = c.reference_factor;
  j["tol"] = c.tol;
  j["seed"] = c.seed;
  j["certify"] = c.certify;
  j["symbolic_certificates"] = !c.no_symbolic;
  j["depth"] = c.depth;
  j["height"] = c.height;
  j["vertex"] = c.vertex;
  j["rate_expr"] = c.rate_expr;
  j["measure_expr"] = c.measure_expr;
  j["restriction"] = c.restriction;
  j["grid"] = c.grid;
  return j;
}

struct Outputs {
  Json result;
  std::optional<ConvergenceReport> convergence;
  std::string csv;  // extra CSV for experiments without a convergence report
  Exit status = kOk;
};

// Smallest reference tag whose truncation has at least `factor` times the
// vertices of the largest iterate; the whole graph also qualifies.
std::int64_t choose_neumann_reference(const Model& m, std::int64_t largest, std::size_t largest_size,
                                      double factor) {
  const std::int64_t cap = max_truncation(m);
  for (std::int64_t t : reference_tags(m, largest + 1)) {
    const std::size_t n = truncation_set(m, t).size();
    if (static_cast<double>(n) >= factor * static_cast<double>(largest_size) ||
        (m.family == Family::Finite && t == cap))
      return t;
  }
  if (m.family == Family::Finite) return cap;
  throw TruncationInsufficient("no truncation below the overflow cap is " + format_number(factor) +
                                   "x larger than the largest iterate",
                               std::numeric_limits<double>::infinity());
}

Outputs run(const Config& c, const Model& model) {
  Outputs out;
  const auto tags = c.truncations.empty() ? default_truncations(model) : parse_truncations(c.truncations);
  const VertexId x = parse_vertex(model, c.vertex);
  const VertexFunction phi = VertexFunction::indicator(x);
  if (!(c.tol > 0.0)) throw ParameterError("--tol must be positive");

  if (!c.dump_matrix.empty()) {
    std::ofstream f(c.dump_matrix);
    if (!f) throw ParameterError("cannot write " + c.dump_matrix);
    dump_matrix(f, assemble(model.graph, truncation_set(model, tags.back()), parse_restriction(c.restriction)));
  }

  const std::string& e = c.experiment;
  if (e == "neumann-convergence" || e == "dirichlet-gap" || e == "l1-defect") {
    const Exhaustion ex = make_exhaustion(model, tags);
    ExperimentOptions opt;
    opt.tol = c.tol;
    opt.vertex = x;
    ReferenceResult ref;
    if (e == "neumann-convergence") {
      opt.alpha = c.alpha;
      const std::int64_t rt = c.reference ? *c.reference
                                          : choose_neumann_reference(model, tags.back(),
                                                                     ex.level_size(ex.levels() - 1),
                                                                     c.reference_factor);
      if (rt <= tags.back() && !(model.family == Family::Finite && rt >= max_truncation(model)))
        throw ParameterError("--reference must exceed the largest truncation");
      std::vector<std::int64_t> rtags{rt};
      if (rt > 0) rtags.insert(rtags.begin(), rt - 1);
      const Exhaustion rex = make_exhaustion(model, rtags);
      ref = neumann_reference(rex, rex.levels() - 1, c.t, phi);
      out.convergence = neumann_convergence_experiment(ex, c.t, phi, ref, opt);
    } else {
      std::int64_t start = c.reference ? *c.reference : tags.back() + 1;
      if (model.family == Family::Finite) start = std::min(start, max_truncation(model));
      const auto rtags = reference_tags(model, start);
      if (rtags.empty()) throw ParameterError("reference start lies beyond the usable truncations");
      const Exhaustion rex = make_exhaustion(model, rtags);
      ref = dirichlet_reference(rex, c.t, phi, c.tol);
      out.convergence = e == "l1-defect" ? l1_defect_experiment(ex, c.t, phi, ref, opt)
                                         : dirichlet_gap_experiment(ex, c.t, phi, ref, opt);
    }
    out.result = to_json(*out.convergence);
    out.result["reference"] = to_json(ref);
  } else if (e == "feller") {
    FellerOptions fo;
    fo.kind = parse_restriction(c.restriction);
    fo.tol = c.tol;
    const auto ftags = c.truncations.empty() ? reference_tags(model, tags.front()) : tags;
    const Exhaustion ex = make_exhaustion(model, ftags);
    out.result = to_json(feller_estimate(ex, c.alpha, x, fo));
  } else if (e == "gap") {
    if (!(c.t > 0.0)) throw ParameterError("--t must be positive for the gap");
    const Exhaustion ex = make_exhaustion(model, reference_tags(model, tags.front()));
    out.result = to_json(semigroup_gap(ex, c.t, x, c.tol), model.graph);
  } else if (e == "classify") {
    if (!model.chain) throw ParameterError("classify needs a birth-death chain model");
    CertificateSet certs = c.no_symbolic ? CertificateSet{} : symbolic_certificates(*model.chain);
    for (const auto& text : c.certify) {
      auto [series, cert] = parse_certificate(text);
      certs[series] = cert;
    }
    const BdClassification cls = classify(*model.chain, c.horizon, certs);
    out.result = to_json(cls);
    if (cls.undetermined()) out.status = kUndetermined;
  } else if (e == "comb-beta") {
    if (model.family != Family::Comb) throw ParameterError("comb-beta needs --model comb");
    out.result = to_json(comb_beta_extraction(c.depth, c.height));
    out.result["target"] = (3.0 - std::sqrt(5.0)) / 2.0;
  } else if (e == "uniform-l1") {
    const UniformL1Result r = uniform_l1_check(model.graph, truncation_set(model, tags.back()), c.t, phi,
                                               c.grid, parse_restriction(c.restriction));
    out.result = to_json(r);
  } else if (e == "ec") {
    Json rows = Json::array();
    std::ostringstream csv;
    csv << std::setprecision(std::numeric_limits<double>::max_digits10) << "k,tag,size,ec\n";
    for (std::size_t k = 0; k < tags.size(); ++k) {
      const VertexSet w = truncation_set(model, tags[k]);
      const double ec = ec_constant(model.graph, w);
      rows.push_back({{"tag", tags[k]}, {"size", w.size()}, {"ec", ec}});
      csv << k << ',' << tags[k] << ',' << w.size() << ',' << ec << '\n';
    }
    out.result["windows"] = rows;
    out.csv = csv.str();
  } else {
    throw ParameterError("unknown experiment \"" + e + "\"");
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
}

int execute(const Config& c) {
  Json report;
  report["schema"] = 1;
  report["generated"] = timestamp();
  report["config"] = config_json(c);
  Exit code = kOk;
  std::string reason;
  std::optional<Outputs> outputs;
  try {
    const Model model = make_model(c.model, c.seed, c.rate_expr, c.measure_expr);
    report["graph"] = model.graph.name();
    outputs = run(c, model);
    code = outputs->status;
    if (code == kUndetermined) reason = "classification undetermined: a series verdict lacks a certificate";
  } catch (const TruncationInsufficient& ex) {
    code = kTruncation;
    reason = ex.what();
    report["last_increment"] = detail::number(ex.last_increment());
  } catch (const InvariantViolation& ex) {
    code = kInvariant;
    reason = ex.what();
  } catch (const std::exception& ex) {
    code = kInput;
    reason = ex.what();
  }
  static const char* names[] = {"ok", "input-error", "truncation-insufficient", "undetermined",
                                "invariant-violated"};
  report["status"] = names[code];
  report["reason"] = reason.empty() ? Json(nullptr) : Json(reason);
  report["exit_code"] = code;
  if (outputs) report["result"] = outputs->result;

  const std::string json = report.dump(2) + "\n";
  if (!reason.empty()) std::cerr << "neumann_lab: " << reason << '\n';
  try {
    if (c.out.empty()) {
      std::cout << json;
    } else {
      write_file(c.out + ".json", json);
      if (outputs && outputs->convergence) {
        std::ostringstream csv, tidy;
        write_csv(csv, *outputs->convergence);
        write_tidy_csv(tidy, *outputs->convergence);
        write_file(c.out + ".csv", csv.str());
        write_file(c.out + ".tidy.csv", tidy.str());
      } else if (outputs && !outputs->csv.empty()) {
        write_file(c.out + ".csv", outputs->csv);
      }
    }
  } catch (const std::exception& ex) {
    std::cerr << "neumann_lab: " << ex.what() << '\n';
    return kInput;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dirichlet and Neumann truncation experiments on weighted graphs"};
  app.require_subcommand(1);
  Config c;
  CLI::App* run_cmd = app.add_subcommand("run", "Run one experiment and write its report");
  run_cmd->add_option("--model", c.model,
                      "comb, bd:unit, bd:geo, bd:explosive, bd:tail, bd:expr, path:N, random:N, file:PATH")
      ->required();
  run_cmd->add_option("--experiment", c.experiment, "Experiment name")
      ->required()
      ->check(CLI::IsMember(kExperiments));
  run_cmd->add_option("--t", c.t, "Time (T for uniform-l1)");
  run_cmd->add_option("--alpha", c.alpha, "Resolvent parameter");
  run_cmd->add_option("--horizon", c.horizon, "Series horizon for classify");
  run_cmd->add_option("--truncations", c.truncations, "a..b[:step] or a,b,c");
  run_cmd->add_option("--reference", c.reference, "Reference truncation parameter");
  run_cmd->add_option("--reference-factor", c.reference_factor,
                      "Minimal size ratio of the Neumann reference to the largest iterate");
  run_cmd->add_option("--tol", c.tol, "Reference tolerance");
  run_cmd->add_option("--out", c.out, "Output prefix (.json, .csv, .tidy.csv)");
  run_cmd->add_option("--seed", c.seed, "Seed for random graphs");
  run_cmd->add_option("--certify", c.certify, "series=verdict:method (repeatable)");
  run_cmd->add_flag("--no-symbolic", c.no_symbolic, "Use only --certify certificates");
  run_cmd->add_option("--depth", c.depth, "Comb tooth depth for comb-beta");
  run_cmd->add_option("--height", c.height, "Comb base height for comb-beta");
  run_cmd->add_option("--vertex", c.vertex, "Source vertex (k,n for the comb)");
  run_cmd->add_option("--rate-expr", c.rate_expr, "Chain rate b(r,r+1) as an expression in r");
  run_cmd->add_option("--measure-expr", c.measure_expr, "Chain measure m(r) as an expression in r");
  run_cmd->add_option("--dump-matrix", c.dump_matrix, "Write the largest truncation's matrix");
  run_cmd->add_option("--restriction", c.restriction, "dirichlet or neumann");
  run_cmd->add_option("--grid", c.grid, "Number of grid times for uniform-l1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kInput;
  }
  return execute(c);
}
