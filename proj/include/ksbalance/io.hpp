#pragma once

// JSON forms of frames, projections, selection certificates and Katz
// reports. Doubles are written in shortest round-trip form, so a
// write/read cycle reproduces every value bit for bit. NaN and infinity
// are refused in both directions.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "ksbalance/barrier.hpp"
#include "ksbalance/frames.hpp"
#include "ksbalance/katz.hpp"

namespace ksbalance {

using Json = nlohmann::json;

/// Malformed or inconsistent file content.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline double finite_or_throw(double x, const char* what) {
  if (!std::isfinite(x)) throw FormatError(std::string(what) + ": non-finite number");
  return x;
}

inline Json complex_to_json(const Complex& z) {
  return Json::array({finite_or_throw(z.real(), "complex"), finite_or_throw(z.imag(), "complex")});
}

inline Complex complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw FormatError("complex number must be a [re, im] pair");
  return {finite_or_throw(j[0].get<double>(), "complex"), finite_or_throw(j[1].get<double>(), "complex")};
}

inline double number(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) throw FormatError(std::string("missing numeric field \"") + key + "\"");
  return finite_or_throw(j.at(key).get<double>(), key);
}

template <class Int>
Int integer(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer())
    throw FormatError(std::string("missing integer field \"") + key + "\"");
  return j.at(key).get<Int>();
}

inline const Json& array(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw FormatError(std::string("missing array field \"") + key + "\"");
  return j.at(key);
}

inline std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

}  // namespace detail

inline Json frame_to_json(const FrameFamily& f) {
  Json vs = Json::array();
  for (const auto& v : f.vectors()) {
    Json row = Json::array();
    for (const auto& z : v) row.push_back(detail::complex_to_json(z));
    vs.push_back(std::move(row));
  }
  return Json{{"k", f.k()}, {"N", f.N()}, {"m", f.m()}, {"vectors", std::move(vs)}};
}

inline FrameFamily frame_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("frame: expected a JSON object");
  const auto k = detail::integer<std::int64_t>(j, "k");
  const auto N = detail::integer<std::int64_t>(j, "N");
  const auto m = detail::integer<std::int64_t>(j, "m");
  const Json& vs = detail::array(j, "vectors");
  if (k < 1 || N < 2 || m < 0) throw FormatError("frame: k must be >= 1 and N >= 2");
  if (static_cast<std::int64_t>(vs.size()) != m) throw FormatError("frame: \"m\" differs from the number of vectors");
  std::vector<CVector> out;
  out.reserve(vs.size());
  for (const auto& row : vs) {
    if (!row.is_array() || static_cast<std::int64_t>(row.size()) != k)
      throw FormatError("frame: every vector must have k entries");
    CVector v;
    v.reserve(row.size());
    for (const auto& z : row) v.push_back(detail::complex_from_json(z));
    out.push_back(std::move(v));
  }
  return FrameFamily(static_cast<std::size_t>(k), static_cast<int>(N), std::move(out));
}

inline Json projection_to_json(const ProjectionMatrix& p) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < p.m(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < p.m(); ++j) row.push_back(detail::complex_to_json(p(i, j)));
    rows.push_back(std::move(row));
  }
  return Json{{"m", p.m()}, {"entries", std::move(rows)}};
}

inline ProjectionMatrix projection_from_json(const Json& j, const Tolerances& tol = default_tolerances()) {
  if (!j.is_object()) throw FormatError("projection: expected a JSON object");
  const auto m = detail::integer<std::int64_t>(j, "m");
  const Json& rows = detail::array(j, "entries");
  if (m < 0 || static_cast<std::int64_t>(rows.size()) != m) throw FormatError("projection: expected m rows");
  ComplexMatrix a(static_cast<std::size_t>(m), static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const Json& row = rows[i];
    if (!row.is_array() || row.size() != a.cols()) throw FormatError("projection: expected m entries per row");
    for (std::size_t c = 0; c < a.cols(); ++c) a(i, c) = detail::complex_from_json(row[c]);
  }
  return ProjectionMatrix(HermitianOperator(std::move(a), tol), tol);
}

inline Json certificate_to_json(const SelectionCertificate& c) {
  Json steps = Json::array();
  for (const auto& s : c.steps) {
    steps.push_back(Json{{"j", s.j},
                         {"index", s.index + 1},
                         {"U", detail::finite_or_throw(s.U, "U")},
                         {"phi", detail::finite_or_throw(s.phi, "phi")},
                         {"lambda_max", detail::finite_or_throw(s.lambda_max, "lambda_max")},
                         {"margin", c.schedule.values.at(s.j) - s.lambda_max}});
  }
  Json indices = Json::array();
  for (std::size_t i : c.indices) indices.push_back(i + 1);
  return Json{
      {"frame",
       {{"k", c.k}, {"N", c.schedule.N}, {"m", c.schedule.m}, {"fingerprint", detail::hex64(c.frame_fingerprint)}}},
      {"schedule", {{"N", c.schedule.N}, {"m", c.schedule.m}, {"n", c.schedule.n}, {"values", c.schedule.values}}},
      {"phi0", c.phi0},
      {"norm_deviation", c.norm_deviation},
      {"steps", std::move(steps)},
      {"final", {{"indices", std::move(indices)}, {"eigenvalues", c.eigenvalues}, {"bound", c.bound}}}};
}

inline SelectionCertificate certificate_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("certificate: expected a JSON object");
  SelectionCertificate c;
  const Json& fr = j.at("frame");
  c.k = detail::integer<std::size_t>(fr, "k");
  const auto fp = fr.at("fingerprint").get<std::string>();
  try {
    std::size_t used = 0;
    c.frame_fingerprint = std::stoull(fp, &used, 16);
    if (used != fp.size()) throw FormatError("certificate: bad fingerprint");
  } catch (const std::logic_error&) {
    throw FormatError("certificate: bad fingerprint");
  }

  const Json& sch = j.at("schedule");
  c.schedule.N = detail::integer<int>(sch, "N");
  c.schedule.m = detail::integer<std::size_t>(sch, "m");
  c.schedule.n = detail::integer<std::size_t>(sch, "n");
  for (const auto& v : detail::array(sch, "values")) c.schedule.values.push_back(detail::finite_or_throw(v.get<double>(), "schedule"));
  if (fr.at("N") != sch.at("N") || fr.at("m") != sch.at("m")) throw FormatError("certificate: frame and schedule disagree");

  c.phi0 = detail::number(j, "phi0");
  c.norm_deviation = detail::number(j, "norm_deviation");
  for (const auto& s : detail::array(j, "steps")) {
    StepRecord r;
    r.j = detail::integer<std::size_t>(s, "j");
    const auto idx = detail::integer<std::int64_t>(s, "index");
    if (idx < 1) throw FormatError("certificate: indices are 1-based");
    r.index = static_cast<std::size_t>(idx - 1);
    r.U = detail::number(s, "U");
    r.phi = detail::number(s, "phi");
    r.lambda_max = detail::number(s, "lambda_max");
    c.steps.push_back(r);
  }
  const Json& fin = j.at("final");
  for (const auto& i : detail::array(fin, "indices")) {
    const auto idx = i.get<std::int64_t>();
    if (idx < 1) throw FormatError("certificate: indices are 1-based");
    c.indices.push_back(static_cast<std::size_t>(idx - 1));
  }
  for (const auto& e : detail::array(fin, "eigenvalues")) c.eigenvalues.push_back(detail::finite_or_throw(e.get<double>(), "eigenvalue"));
  c.bound = detail::number(fin, "bound");
  return c;
}

inline Json katz_report_to_json(const DichotomyReport& r) {
  Json violations = Json::array();
  for (const auto& v : r.violations) {
    Json elems = Json::array();
    for (unsigned i = 0; i < 32; ++i)
      if ((v.subset >> i) & 1u) elems.push_back(i + 1);
    violations.push_back(Json{{"subset", std::move(elems)},
                              {"size", v.size},
                              {"min", v.min.str()},
                              {"max", v.max.str()},
                              {"reason", v.reason}});
  }
  Json j{{"N", r.N},
         {"mode", r.sampled ? "sampled" : "exhaustive"},
         {"family_size", r.family_size},
         {"subsets_checked", r.subsets_checked},
         {"counts", {{"below_half", r.below_half}, {"at_half", r.at_half}, {"above_half", r.above_half}}},
         {"violations", std::move(violations)},
         {"passed", r.passed()},
         {"note",
          "Only the one-sided dichotomy is checked. A two-sided interval q +/- O(1/sqrt(N)) for frames is "
          "conjectural and is not asserted here."}};
  if (r.sampled) j["seed"] = r.seed;
  return j;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

inline std::string dump(const Json& j) { return j.dump(1) + "\n"; }

}  // namespace ksbalance
