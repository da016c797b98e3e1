#pragma once

// Declarative scenario runner. Scenarios are JSON documents; results are
// tables emitted as CSV or JSON with locale-independent 17-significant-digit
// formatting, so a scenario plus its seed fully determines every output byte.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "liarlab/decoherence.hpp"
#include "liarlab/errors.hpp"
#include "liarlab/liar.hpp"
#include "liarlab/measurement.hpp"
#include "liarlab/repeat.hpp"
#include "liarlab/tensor.hpp"

namespace liarlab {

inline constexpr const char* kToolVersion = "liarlab 1.0.0";

enum class Experiment { Sweep, Classify, Budget, Decohere, Repeat };

struct Scenario {
  std::size_t n = 0;
  std::vector<cplx> g;
  CompletionSpec completion;
  Experiment experiment = Experiment::Sweep;
  std::size_t perturbed_label = 1;  // k (apparatus) or m (environment)
  std::vector<double> grid;
  std::uint64_t seed = 0;
  std::string out_path;
  bool renormalize = false;
  std::string digest;  // FNV-1a over the canonical document

  SystemPreparation system() const { return SystemPreparation(g); }
};

namespace detail {

inline std::string format_value(double v) {
  char buf[64];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

inline std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace detail

struct Cell {
  std::string text;
  bool numeric;

  Cell(double v) : text(detail::format_value(v)), numeric(true) {}
  Cell(std::string s) : text(std::move(s)), numeric(false) {}
};

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::string scenario_digest;
  std::uint64_t seed = 0;

  void add_row(std::vector<Cell> cells) {
    if (cells.size() != columns.size())
      throw ArgumentError("ResultTable: cell count != column count");
    rows.push_back(std::move(cells));
  }
};

namespace detail {

inline const nlohmann::json* find(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

inline cplx parse_complex(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ValidationError(field + ": complex numbers are [re, im] pairs");
  return cplx{j[0].get<double>(), j[1].get<double>()};
}

inline std::vector<double> parse_grid(const nlohmann::json& p) {
  if (const auto* list = find(p, "epsilons")) {
    if (!list->is_array() || list->empty())
      throw ValidationError("perturbation.epsilons: nonempty array required");
    std::vector<double> grid;
    for (const auto& v : *list) {
      if (!v.is_number())
        throw ValidationError("perturbation.epsilons: numbers required");
      grid.push_back(v.get<double>());
    }
    return grid;
  }
  double start = 0.0, stop = 0.5;
  std::size_t count = 11;
  if (const auto* gr = find(p, "grid")) {
    if (const auto* v = find(*gr, "start")) start = v->get<double>();
    if (const auto* v = find(*gr, "stop")) stop = v->get<double>();
    if (const auto* v = find(*gr, "count")) count = v->get<std::size_t>();
    if (count < 2 || !(stop > start))
      throw ValidationError("perturbation.grid: need count >= 2, stop > start");
  }
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i)
    grid[i] = start + (stop - start) * double(i) / double(count - 1);
  return grid;
}

}  // namespace detail

inline Scenario parse_scenario(const std::string& text,
                               bool force_renormalize = false) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("scenario: object required");

  Scenario s;
  s.digest = detail::fnv1a_hex(doc.dump());

  const auto* nj = detail::find(doc, "n");
  if (!nj || !nj->is_number_unsigned())
    throw ValidationError("n: positive integer required");
  s.n = nj->get<std::size_t>();
  if (s.n < 2) throw ValidationError("n: n >= 2 required (no liar state exists for n < 2)");

  if (const auto* v = detail::find(doc, "seed")) s.seed = v->get<std::uint64_t>();
  if (const auto* v = detail::find(doc, "renormalize"))
    s.renormalize = v->get<bool>();
  s.renormalize = s.renormalize || force_renormalize;
  if (const auto* v = detail::find(doc, "out")) s.out_path = v->get<std::string>();

  if (const auto* gj = detail::find(doc, "g")) {
    if (!gj->is_array() || gj->size() != s.n)
      throw ValidationError("g: array of n [re, im] pairs required");
    for (const auto& c : *gj) s.g.push_back(detail::parse_complex(c, "g"));
  } else {
    s.g = SystemPreparation::uniform(s.n).g();
  }
  double norm_sq = 0;
  for (const cplx& c : s.g) norm_sq += std::norm(c);
  if (std::abs(std::sqrt(norm_sq) - 1.0) > kUnitaryTol) {
    if (!s.renormalize)
      throw ValidationError("g: not normalized (set renormalize to accept)");
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (cplx& c : s.g) c *= inv;
  }

  if (const auto* cj = detail::find(doc, "completion")) {
    const auto* tj = detail::find(*cj, "type");
    if (!tj || !tj->is_string())
      throw ValidationError("completion.type: string required");
    const std::string type = tj->get<std::string>();
    if (type == "pointer_shift") {
      s.completion = CompletionSpec::pointer_shift();
    } else if (type == "haar") {
      std::uint64_t seed = s.seed;
      if (const auto* v = detail::find(*cj, "seed"))
        seed = v->get<std::uint64_t>();
      s.completion = CompletionSpec::haar(seed);
    } else if (type == "permutation") {
      const auto* tb = detail::find(*cj, "table");
      if (!tb || !tb->is_array())
        throw ValidationError("completion.table: array of flat labels required");
      std::vector<std::size_t> table;
      for (const auto& v : *tb) table.push_back(v.get<std::size_t>());
      s.completion = CompletionSpec::permutation(std::move(table));
    } else {
      throw ValidationError("completion.type: unknown completion '" + type + "'");
    }
  }

  const auto* ej = detail::find(doc, "experiment");
  if (!ej || !ej->is_string())
    throw ValidationError("experiment: string tag required");
  const std::string exp = ej->get<std::string>();
  if (exp == "sweep") s.experiment = Experiment::Sweep;
  else if (exp == "classify") s.experiment = Experiment::Classify;
  else if (exp == "budget") s.experiment = Experiment::Budget;
  else if (exp == "decohere") s.experiment = Experiment::Decohere;
  else if (exp == "repeat") s.experiment = Experiment::Repeat;
  else throw ValidationError("experiment: unknown tag '" + exp + "'");

  if (const auto* pj = detail::find(doc, "perturbation")) {
    if (const auto* v = detail::find(*pj, "k"))
      s.perturbed_label = v->get<std::size_t>();
    else if (const auto* v2 = detail::find(*pj, "m"))
      s.perturbed_label = v2->get<std::size_t>();
    s.grid = detail::parse_grid(*pj);
  } else {
    s.grid = detail::parse_grid(nlohmann::json::object());
  }
  if (s.perturbed_label < 1 || s.perturbed_label > s.n)
    throw ValidationError("perturbation: label must be in 1..n");
  try {
    detail::check_grid(s.grid);
  } catch (const Error& e) {
    throw ValidationError(std::string("perturbation: ") + e.what());
  }

  // Pre-validate assembled preparations so failures carry field names.
  try {
    s.system();
  } catch (const Error& e) {
    throw ValidationError(std::string("g: ") + e.what());
  }
  if (s.completion.kind == CompletionSpec::Kind::Permutation) {
    try {
      build_permutation(s.n, s.completion.table);
    } catch (const Error& e) {
      throw ValidationError(std::string("completion.table: ") + e.what());
    }
  }
  return s;
}

inline ResultTable run_scenario(const Scenario& s) {
  ResultTable t;
  t.scenario_digest = s.digest;
  t.seed = s.seed;
  const SystemPreparation sys = s.system();

  switch (s.experiment) {
    case Experiment::Sweep: {
      MeasurementUnitary m = build_measurement(s.n, s.completion);
      StabilityCurve curve =
          stability_sweep(m, sys, s.perturbed_label, s.grid);
      t.columns = {"epsilon", "liar_weight", "ready_residual", "born_tv"};
      for (const StabilitySample& p : curve.samples)
        t.add_row({p.epsilon, p.liar_weight, p.ready_residual, p.born_tv});
      break;
    }
    case Experiment::Classify: {
      MeasurementUnitary m = build_measurement(s.n, s.completion);
      CaseReport report = classify_completion(m);
      t.columns = {"input_i", "input_k", "coupling_w", "liar_w", "ready_w"};
      for (const CaseInputWeights& w : report.inputs)
        t.add_row({double(w.system_label + 1), double(w.apparatus_label),
                   w.coupling_weight, w.liar_weight, w.ready_weight});
      break;
    }
    case Experiment::Budget: {
      MeasurementUnitary m = build_measurement(s.n, s.completion);
      t.columns = {"n", "completion", "liar_budget"};
      t.add_row({double(s.n), Cell(s.completion.name()), liar_budget(m)});
      break;
    }
    case Experiment::Decohere: {
      EnvironmentUnitary env = build_environment(s.n, s.completion);
      // Perfect-coupling input: the post-measurement state of an unperturbed
      // apparatus.
      std::vector<cplx> amps(s.n * (s.n + 1), cplx{0, 0});
      for (std::size_t i = 0; i < s.n; ++i)
        amps[sa_label(s.n, i, i + 1)] = sys.g()[i];
      StateVector psi_sa(FactorDims{s.n, s.n + 1}, std::move(amps));
      EnvStabilityCurve curve =
          env_stability_sweep(env, psi_sa, s.perturbed_label, s.grid);
      t.columns = {"eta", "env_liar_weight", "coherence_l1", "purity"};
      for (const EnvStabilitySample& p : curve.samples)
        t.add_row({p.eta, p.env_liar_weight, p.coherence_l1, p.purity});
      break;
    }
    case Experiment::Repeat: {
      t.columns = {"epsilon", "agreement", "disagreement", "ready_involved"};
      for (double eps : s.grid) {
        // scenario completion drives the first stage; the second stage is the
        // ideal ("good") pointer-shift measurement
        RepeatOutcome out = run_repeat(
            s.n, s.completion, CompletionSpec::pointer_shift(), sys,
            ApparatusPreparation::perturbed(s.n, s.perturbed_label, eps));
        t.add_row({eps, out.agreement, out.disagreement, out.ready_involved});
      }
      break;
    }
  }
  return t;
}

enum class OutputFormat { Csv, Json };

inline std::string render(const ResultTable& t, OutputFormat format) {
  std::ostringstream out;
  if (format == OutputFormat::Csv) {
    out << "# tool_version: " << kToolVersion << "\n";
    out << "# scenario_digest: " << t.scenario_digest << "\n";
    out << "# seed: " << t.seed << "\n";
    for (std::size_t c = 0; c < t.columns.size(); ++c)
      out << (c ? "," : "") << t.columns[c];
    out << "\n";
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c)
        out << (c ? "," : "") << row[c].text;
      out << "\n";
    }
  } else {
    // hand-assembled so numeric cells keep the exact CSV digits
    out << "{\n";
    out << "  \"metadata\": {\"tool_version\": \"" << kToolVersion
        << "\", \"scenario_digest\": \"" << t.scenario_digest
        << "\", \"seed\": " << t.seed << "},\n";
    out << "  \"columns\": {";
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      if (c) out << ", ";
      out << "\"" << t.columns[c] << "\": [";
      for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (r) out << ", ";
        const Cell& cell = t.rows[r][c];
        if (cell.numeric) out << cell.text;
        else out << "\"" << cell.text << "\"";
      }
      out << "]";
    }
    out << "}\n}\n";
  }
  return out.str();
}

inline void emit(const ResultTable& t, OutputFormat format,
                 const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("emit: cannot open '" + path + "'");
  f << render(t, format);
  if (!f) throw IoError("emit: write failed for '" + path + "'");
}

}  // namespace liarlab
