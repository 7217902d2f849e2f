#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lvcert/certificates.hpp"
#include "lvcert/common.hpp"
#include "lvcert/model.hpp"
#include "lvcert/search.hpp"
#include "lvcert/sim.hpp"

namespace lvcert {

using Json = nlohmann::json;

/// Parses "p/q" exactly: both halves must be integers with magnitude below
/// 2^53, so the one floating division is correctly rounded and the value is
/// the nearest binary double of the rational.
inline double parse_rational_string(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos || slash == 0 || slash + 1 == text.size())
    throw ParseError("not a rational: '" + text + "'");
  const std::string num_s = text.substr(0, slash);
  const std::string den_s = text.substr(slash + 1);
  std::size_t used = 0;
  long long num = 0, den = 0;
  try {
    num = std::stoll(num_s, &used);
    if (used != num_s.size()) throw ParseError("");
    den = std::stoll(den_s, &used);
    if (used != den_s.size()) throw ParseError("");
  } catch (const std::exception&) {
    throw ParseError("malformed rational: '" + text + "'");
  }
  if (den == 0) throw ParseError("zero denominator: '" + text + "'");
  constexpr long long kExact = 1LL << 53;
  if (std::llabs(num) > kExact || std::llabs(den) > kExact)
    throw ParseError("rational out of exact range: '" + text + "'");
  return static_cast<double>(num) / static_cast<double>(den);
}

/// Accepts a decimal string or an exact rational string.
inline double parse_number_string(const std::string& text) {
  if (text.find('/') != std::string::npos) return parse_rational_string(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ParseError("malformed number: '" + text + "'");
  }
  if (used != text.size()) throw ParseError("malformed number: '" + text + "'");
  return v;
}

inline double entry_to_double(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_number_string(j.get<std::string>());
  throw ParseError("matrix/vector entries must be numbers or strings");
}

inline Vec vec_from_json(const Json& j) {
  if (!j.is_array()) throw ParseError("expected an array");
  Vec v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = entry_to_double(j[i]);
  return v;
}

inline Mat mat_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("expected a nonempty array of rows");
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j[0].size());
  Mat m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    if (static_cast<Index>(j[static_cast<std::size_t>(i)].size()) != cols)
      throw ParseError("ragged matrix rows");
    for (Index c = 0; c < cols; ++c)
      m(i, c) = entry_to_double(j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)]);
  }
  return m;
}

inline Json vec_to_json(const Vec& v) {
  Json j = Json::array();
  for (Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

inline Json mat_to_json(const Mat& m) {
  Json j = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    j.push_back(std::move(row));
  }
  return j;
}

/// Input document: dimension plus either the raw pair (r, B) or the
/// normalized interaction matrix A. Entries may be decimals or exact
/// rational strings; rationals are converted to binary doubles once, here.
struct SystemFile {
  std::string name;
  std::string notes;
  Index n = 0;
  std::optional<Vec> r;
  std::optional<Mat> B;
  std::optional<Mat> A;

  bool is_raw() const { return r.has_value(); }
};

inline SystemFile parse_system_json(const Json& j) {
  SystemFile sf;
  if (!j.is_object()) throw ParseError("system file: expected a JSON object");
  sf.name = j.value("name", std::string{});
  sf.notes = j.value("notes", std::string{});
  if (!j.contains("n") || !j["n"].is_number_integer())
    throw ParseError("system file: missing integer field 'n'");
  sf.n = j["n"].get<Index>();
  if (sf.n < 1) throw ParseError("system file: n must be >= 1");

  const bool has_raw = j.contains("r") || j.contains("B");
  const bool has_norm = j.contains("A");
  if (has_raw == has_norm)
    throw ParseError("system file: provide exactly one of (r, B) or A");
  if (has_raw) {
    if (!j.contains("r") || !j.contains("B"))
      throw ParseError("system file: raw form needs both r and B");
    sf.r = vec_from_json(j["r"]);
    sf.B = mat_from_json(j["B"]);
    if (sf.r->size() != sf.n || sf.B->rows() != sf.n || sf.B->cols() != sf.n)
      throw ParseError("system file: r/B dimensions do not match n");
  } else {
    sf.A = mat_from_json(j["A"]);
    if (sf.A->rows() != sf.n || sf.A->cols() != sf.n)
      throw ParseError("system file: A dimensions do not match n");
  }
  return sf;
}

inline SystemFile load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open system file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError("system file " + path + ": " + e.what());
  }
  return parse_system_json(j);
}

inline Json serialize_system(const SystemFile& sf) {
  Json j;
  if (!sf.name.empty()) j["name"] = sf.name;
  if (!sf.notes.empty()) j["notes"] = sf.notes;
  j["n"] = sf.n;
  if (sf.is_raw()) {
    j["r"] = vec_to_json(*sf.r);
    j["B"] = mat_to_json(*sf.B);
  } else {
    j["A"] = mat_to_json(*sf.A);
  }
  return j;
}

inline Json params_to_json(const Theorem1Params& tp) {
  Json j;
  j["kappa"] = tp.kappa;
  j["mu"] = tp.mu;
  j["g"] = tp.g;
  j["delta"] = tp.delta;
  j["b"] = tp.b;
  j["p"] = vec_to_json(tp.p);
  j["q"] = vec_to_json(tp.q);
  j["k"] = vec_to_json(tp.k);
  j["beta"] = vec_to_json(tp.beta);
  return j;
}

inline Theorem1Params params_from_json(const Json& j) {
  Theorem1Params tp;
  tp.kappa = j.at("kappa").get<double>();
  tp.mu = j.at("mu").get<double>();
  tp.g = j.at("g").get<double>();
  tp.delta = j.at("delta").get<double>();
  tp.b = j.at("b").get<double>();
  tp.p = vec_from_json(j.at("p"));
  tp.q = vec_from_json(j.at("q"));
  tp.k = vec_from_json(j.at("k"));
  tp.beta = vec_from_json(j.at("beta"));
  return tp;
}

inline Json invariant_set_to_json(const InvariantSetArgument& inv) {
  Json j;
  j["mode"] = to_string(inv.mode);
  if (inv.family) {
    Json f;
    f["lambda1"] = inv.family->lambda1;
    f["lambda2"] = inv.family->lambda2;
    f["lambda3"] = inv.family->lambda3;
    f["delta"] = inv.family->delta;
    j["family"] = std::move(f);
  }
  if (!inv.perm.empty()) {
    Json p = Json::array();
    for (Index i : inv.perm) p.push_back(i);
    j["perm"] = std::move(p);
  }
  if (!inv.invariant_points.empty()) {
    Json pts = Json::array();
    for (const Vec& pt : inv.invariant_points) pts.push_back(vec_to_json(pt));
    j["points"] = std::move(pts);
  }
  if (!inv.justification.empty()) j["justification"] = inv.justification;
  return j;
}

inline InvariantSetArgument invariant_set_from_json(const Json& j) {
  InvariantSetArgument inv;
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "R_negative_definite")
    inv.mode = InvariantSetMode::r_negative_definite;
  else if (mode == "structured_family_J")
    inv.mode = InvariantSetMode::structured_family_j;
  else if (mode == "user_asserted")
    inv.mode = InvariantSetMode::user_asserted;
  else
    throw ParseError("unknown invariant-set mode: " + mode);
  if (j.contains("family")) {
    StructuredFamilyParams sf;
    sf.lambda1 = j["family"].at("lambda1").get<double>();
    sf.lambda2 = j["family"].at("lambda2").get<double>();
    sf.lambda3 = j["family"].at("lambda3").get<double>();
    sf.delta = j["family"].at("delta").get<double>();
    inv.family = sf;
  }
  if (j.contains("perm"))
    for (const auto& v : j["perm"]) inv.perm.push_back(v.get<Index>());
  if (j.contains("points"))
    for (const auto& v : j["points"]) inv.invariant_points.push_back(vec_from_json(v));
  inv.justification = j.value("justification", std::string{});
  return inv;
}

inline Json certificate_to_json(const Certificate& cert) {
  Json j;
  j["family"] = to_string(cert.family);
  j["params"] = params_to_json(cert.params);
  Json margins;
  for (const auto& [name, value] : cert.margins) margins[name] = value;
  j["margins"] = std::move(margins);
  j["invariant_set"] = invariant_set_to_json(cert.invariant_set);
  j["side_conditions"] = cert.side_conditions;
  return j;
}

inline Certificate certificate_from_json(const Json& j) {
  Certificate cert;
  const std::string family = j.at("family").get<std::string>();
  if (family == "volterra_lyapunov")
    cert.family = CertificateFamily::volterra_lyapunov;
  else if (family == "eigenvector")
    cert.family = CertificateFamily::eigenvector;
  else if (family == "theorem1_a")
    cert.family = CertificateFamily::theorem1_a;
  else if (family == "theorem1_b")
    cert.family = CertificateFamily::theorem1_b;
  else if (family == "theorem1_c")
    cert.family = CertificateFamily::theorem1_c;
  else
    throw ParseError("unknown certificate family: " + family);
  cert.params = params_from_json(j.at("params"));
  for (const auto& [name, value] : j.at("margins").items())
    cert.margins[name] = value.get<double>();
  cert.invariant_set = invariant_set_from_json(j.at("invariant_set"));
  for (const auto& v : j.at("side_conditions")) cert.side_conditions.push_back(v.get<std::string>());
  return cert;
}

/// Self-contained run record: input echo, the analyzed matrix, the verdict
/// and every knob needed to re-check it. Re-running verification on the
/// serialized parameters reproduces the pass verdict.
struct CertificateReport {
  std::string status;  // "certified" or "inconclusive"
  int stage = 0;
  Json input_echo;
  std::optional<Vec> equilibrium;
  Mat A;
  std::optional<Certificate> certificate;
  std::map<std::string, double> stage_best;
  SearchBudget budget;
  long evals_used = 0;
};

inline Json report_to_json(const CertificateReport& rep) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["tool_version"] = kToolVersion;
  j["status"] = rep.status;
  j["stage"] = rep.stage;
  j["input"] = rep.input_echo;
  if (rep.equilibrium) j["equilibrium"] = vec_to_json(*rep.equilibrium);
  j["A"] = mat_to_json(rep.A);
  if (rep.certificate) j["certificate"] = certificate_to_json(*rep.certificate);
  Json best;
  for (const auto& [name, value] : rep.stage_best) best[name] = value;
  j["stage_best"] = std::move(best);
  j["budget"] = {{"max_restarts", rep.budget.max_restarts},
                 {"max_evals_per_restart", rep.budget.max_evals_per_restart},
                 {"seed", rep.budget.seed},
                 {"target_margin", rep.budget.target_margin}};
  j["evals_used"] = rep.evals_used;
  return j;
}

inline CertificateReport report_from_json(const Json& j) {
  if (j.at("schema_version").get<int>() != kReportSchemaVersion)
    throw ParseError("unsupported report schema version");
  CertificateReport rep;
  rep.status = j.at("status").get<std::string>();
  rep.stage = j.at("stage").get<int>();
  rep.input_echo = j.at("input");
  if (j.contains("equilibrium")) rep.equilibrium = vec_from_json(j["equilibrium"]);
  rep.A = mat_from_json(j.at("A"));
  if (j.contains("certificate")) rep.certificate = certificate_from_json(j["certificate"]);
  if (j.contains("stage_best"))
    for (const auto& [name, value] : j["stage_best"].items())
      rep.stage_best[name] = value.get<double>();
  const Json& b = j.at("budget");
  rep.budget.max_restarts = b.at("max_restarts").get<int>();
  rep.budget.max_evals_per_restart = b.at("max_evals_per_restart").get<long>();
  rep.budget.seed = b.at("seed").get<std::uint64_t>();
  rep.budget.target_margin = b.at("target_margin").get<double>();
  rep.evals_used = j.value("evals_used", 0L);
  return rep;
}

inline CertificateReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open report file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError("report file " + path + ": " + e.what());
  }
  return report_from_json(j);
}

/// CSV export: header `t,x1,...,xn`, one row per sample time, decimal
/// floating point with 17 significant digits.
inline void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  if (traj.states.empty()) throw InvalidParamsError("write_trajectory_csv: empty trajectory");
  const Index n = traj.states.front().size();
  out << "t";
  for (Index i = 0; i < n; ++i) out << ",x" << (i + 1);
  out << "\n";
  char buf[40];
  for (std::size_t s = 0; s < traj.states.size(); ++s) {
    std::snprintf(buf, sizeof(buf), "%.17g", traj.times[s]);
    out << buf;
    for (Index i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", traj.states[s][i]);
      out << "," << buf;
    }
    out << "\n";
  }
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace lvcert
