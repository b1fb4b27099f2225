#pragma once

#include "inewton/diagnostics.hpp"
#include "inewton/engine.hpp"
#include "inewton/least_squares.hpp"
#include "inewton/problem.hpp"
#include "inewton/run.hpp"
#include "inewton/theory.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace inewton::io {

using Json = nlohmann::json;

/// Either kind of problem the CLI can persist.
using AnyProblem = std::variant<Problem, LeastSquaresProblem>;

inline Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Vector vector_from_json(const Json& j) {
  require(j.is_array(), "expected a JSON array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

/// Row-major nested arrays.
inline Json matrix_to_json(const Matrix& a) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

inline Matrix matrix_from_json(const Json& j) {
  require(j.is_array() && !j.empty(), "expected a nonempty matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix a(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    require(row.is_array() && static_cast<Eigen::Index>(row.size()) == cols,
            "matrix rows must have equal length");
    for (Eigen::Index c = 0; c < cols; ++c) {
      a(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return a;
}

template <class T>
Json optional_to_json(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_same_v<T, Vector>) {
    return vector_to_json(*v);
  } else {
    return *v;
  }
}

inline std::optional<double> optional_double(const Json& j,
                                             const std::string& key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

inline std::optional<Vector> optional_vector(const Json& j,
                                             const std::string& key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return vector_from_json(j.at(key));
}

inline Json problem_to_json(const Problem& p) {
  Json comps = Json::array();
  for (const auto& c : p.components()) {
    comps.push_back({{"A", matrix_to_json(c.A)},
                     {"b", vector_to_json(c.b)},
                     {"offset", c.offset},
                     {"logcosh_weight", c.logcosh_weight},
                     {"logcosh_center", vector_to_json(c.logcosh_center)}});
  }
  const auto& m = p.metadata();
  return {{"kind", "finite_sum"},
          {"family", m.family},
          {"dimension", p.dimension()},
          {"components", std::move(comps)},
          {"metadata",
           {{"c", m.c},
            {"C", m.C},
            {"gradient_growth_M", optional_to_json(m.gradient_growth_M)},
            {"known_minimizer", optional_to_json(m.known_minimizer)},
            {"diameter_R", optional_to_json(m.diameter_R)}}}};
}

inline Json problem_to_json(const LeastSquaresProblem& p) {
  Json res = Json::array();
  for (const auto& r : p.residuals()) {
    res.push_back({{"a", vector_to_json(r.a)}, {"b", r.b}, {"beta", r.beta}});
  }
  const auto& m = p.metadata();
  return {{"kind", "least_squares"},
          {"family", m.family},
          {"dimension", p.dimension()},
          {"residuals", std::move(res)},
          {"metadata",
           {{"zero_residual", m.zero_residual},
            {"C_gn", optional_to_json(m.C_gn)},
            {"known_minimizer", optional_to_json(m.known_minimizer)}}}};
}

inline Json problem_to_json(const AnyProblem& p) {
  return std::visit([](const auto& q) { return problem_to_json(q); }, p);
}

inline AnyProblem problem_from_json(const Json& j) {
  require(j.is_object() && j.contains("kind"), "problem JSON needs a kind");
  const std::string kind = j.at("kind").get<std::string>();
  const Json& meta_j = j.at("metadata");
  if (kind == "finite_sum") {
    std::vector<SmoothComponent> comps;
    for (const auto& c : j.at("components")) {
      comps.push_back({matrix_from_json(c.at("A")), vector_from_json(c.at("b")),
                       c.at("offset").get<double>(),
                       c.at("logcosh_weight").get<double>(),
                       vector_from_json(c.at("logcosh_center"))});
    }
    ProblemMetadata meta;
    meta.family = j.at("family").get<std::string>();
    meta.c = meta_j.at("c").get<double>();
    meta.C = meta_j.at("C").get<double>();
    meta.gradient_growth_M = optional_double(meta_j, "gradient_growth_M");
    meta.known_minimizer = optional_vector(meta_j, "known_minimizer");
    meta.diameter_R = optional_double(meta_j, "diameter_R");
    return Problem(std::move(comps), std::move(meta));
  }
  if (kind == "least_squares") {
    std::vector<ResidualComponent> res;
    for (const auto& r : j.at("residuals")) {
      res.push_back({vector_from_json(r.at("a")), r.at("b").get<double>(),
                     r.at("beta").get<double>()});
    }
    LeastSquaresMetadata meta;
    meta.family = j.at("family").get<std::string>();
    meta.zero_residual = meta_j.at("zero_residual").get<bool>();
    meta.C_gn = optional_double(meta_j, "C_gn");
    meta.known_minimizer = optional_vector(meta_j, "known_minimizer");
    return LeastSquaresProblem(std::move(res), std::move(meta));
  }
  throw ArgumentError("unknown problem kind '" + kind + "'");
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ArgumentError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

inline void write_json_file(const std::string& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

inline AnyProblem load_problem(const std::string& path) {
  return problem_from_json(read_json_file(path));
}

inline void save_problem(const std::string& path, const AnyProblem& p) {
  write_json_file(path, problem_to_json(p));
}

// ---------------------------------------------------------------------------
// Trace CSV

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Header of the per-cycle trace: the fixed columns followed by the cycle
/// start coordinates x0..x{n-1}.
inline std::vector<std::string> trace_columns(std::size_t n) {
  std::vector<std::string> cols = {
      "k",           "alpha",        "gamma",        "grad_norm",
      "dist_to_opt", "e_norm",       "ehat_norm",    "lambda_min_H",
      "lambda_max_H", "alpha_star",  "trial_count",  "identity_residual"};
  for (std::size_t i = 0; i < n; ++i) cols.push_back("x" + std::to_string(i));
  return cols;
}

inline void write_trace_csv(std::ostream& out,
                            const std::vector<CycleTrace>& traces,
                            std::size_t n) {
  const auto cols = trace_columns(n);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out << (i ? "," : "") << cols[i];
  }
  out << "\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
  };
  for (const auto& t : traces) {
    out << t.k << ',' << format_double(t.alpha) << ','
        << format_double(t.gamma) << ',' << format_double(t.full_grad_norm)
        << ',' << opt(t.dist_to_opt) << ','
        << format_double(t.grad_error.norm()) << ',' << opt(t.ehat_norm) << ','
        << format_double(t.H_end_eigbounds.min) << ','
        << format_double(t.H_end_eigbounds.max) << ',' << opt(t.alpha_star)
        << ',' << t.trial_count << ',' << format_double(t.identity_residual);
    for (Eigen::Index i = 0; i < t.start.size(); ++i) {
      out << ',' << format_double(t.start(i));
    }
    out << "\n";
  }
}

inline std::string trace_csv(const std::vector<CycleTrace>& traces,
                             std::size_t n) {
  std::ostringstream out;
  write_trace_csv(out, traces, n);
  return out.str();
}

/// One parsed row of a trace CSV.
struct TraceRow {
  std::size_t k = 0;
  double alpha = 0.0;
  double gamma = 0.0;
  double grad_norm = 0.0;
  std::optional<double> dist_to_opt;
  double e_norm = 0.0;
  std::optional<double> ehat_norm;
  double lambda_min_H = 0.0;
  double lambda_max_H = 0.0;
  std::optional<double> alpha_star;
  std::size_t trial_count = 1;
  double identity_residual = 0.0;
  Vector start;
};

inline std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "trace CSV is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const auto base = trace_columns(0);
  require(header.size() > base.size(), "trace CSV has no coordinate columns");
  for (std::size_t i = 0; i < base.size(); ++i) {
    require(header[i] == base[i], "trace CSV column " + std::to_string(i) +
                                      " should be '" + base[i] + "'");
  }
  const std::size_t n = header.size() - base.size();
  std::vector<TraceRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    require(cells.size() == header.size(),
            "trace CSV line " + std::to_string(line_no) + " has " +
                std::to_string(cells.size()) + " cells, expected " +
                std::to_string(header.size()));
    auto num = [&](std::size_t i) {
      try {
        return std::stod(cells[i]);
      } catch (const std::exception&) {
        throw ArgumentError("trace CSV line " + std::to_string(line_no) +
                            ": bad number in column " + header[i]);
      }
    };
    auto opt = [&](std::size_t i) -> std::optional<double> {
      if (cells[i].empty()) return std::nullopt;
      return num(i);
    };
    TraceRow r;
    r.k = static_cast<std::size_t>(num(0));
    r.alpha = num(1);
    r.gamma = num(2);
    r.grad_norm = num(3);
    r.dist_to_opt = opt(4);
    r.e_norm = num(5);
    r.ehat_norm = opt(6);
    r.lambda_min_H = num(7);
    r.lambda_max_H = num(8);
    r.alpha_star = opt(9);
    r.trial_count = static_cast<std::size_t>(num(10));
    r.identity_residual = num(11);
    r.start.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      r.start(static_cast<Eigen::Index>(i)) = num(base.size() + i);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Reports

inline Json to_json(const theory::TheoryReport& r) {
  Json B = Json::array();
  for (double b : r.B.B) B.push_back(b);
  return {{"c", r.consts.c},
          {"C", r.consts.C},
          {"Q", r.consts.Q()},
          {"m", r.consts.m},
          {"M", optional_to_json(r.consts.M)},
          {"eta", r.eta},
          {"nu", r.nu},
          {"phi", r.phi},
          {"B_sequence", std::move(B)},
          {"B_total", r.B.total},
          {"B_min", r.B_min},
          {"B_max", r.B_max},
          {"kappa_hypothesis", r.kappa_hypothesis},
          {"kappa", optional_to_json(r.kappa)},
          {"r_nu", optional_to_json(r.r_nu)},
          {"r_hat_nu", optional_to_json(r.r_hat_nu)},
          {"phi_bar_nu", r.phi_bar.value},
          {"phi_bar_root_found", r.phi_bar.root_found},
          {"phi_bar_limiting_polynomial", r.phi_bar.limiting_polynomial},
          {"eta_threshold", r.eta_threshold},
          {"linear_rate_condition", r.linear_rate_condition}};
}

inline Json to_json(const diag::BoundReport& b) {
  Json j = {{"bound_name", b.bound_name},
            {"worst_margin", b.worst_margin},
            {"tolerance", b.tolerance},
            {"violated", b.violated},
            {"cycles_checked", b.cycles_checked},
            {"skipped", b.skipped}};
  if (!b.notice.empty()) j["notice"] = b.notice;
  return j;
}

inline Json to_json(const diag::RateFit& f) {
  return {{"window", f.window},
          {"rho_hat", f.rho_hat},
          {"r_squared", f.r_squared},
          {"ratio_tail", f.ratio_tail},
          {"classification", diag::to_string(f.classification)},
          {"points_used", f.points_used},
          {"exact_convergence", f.exact_convergence}};
}

inline Json to_json(const diag::VerifyReport& r) {
  Json bounds = Json::array();
  for (const auto& b : r.bounds) bounds.push_back(to_json(b));
  Json j = {{"bounds", std::move(bounds)}, {"any_violated", r.any_violated()}};
  j["grad_rate"] = r.grad_rate ? to_json(*r.grad_rate) : Json(nullptr);
  j["dist_rate"] = r.dist_rate ? to_json(*r.dist_rate) : Json(nullptr);
  return j;
}

}  // namespace inewton::io
