#pragma once

// File formats and job driver behind the nearpencil executable.
//
// Pencil file:  {"n": int, "m": int, "A_re": [[...]], "A_im": [[...]],
//                "B_re": [[...]], "B_im": [[...]]}, arrays row-major n x m.
// Result file:  JSON with fixed key order and %.17g numbers.
// Pseudospectra: CSV "re,im,sigma_min".

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "nearpencil/distance.hpp"
#include "nearpencil/errors.hpp"
#include "nearpencil/pseudospectra.hpp"

namespace nearpencil {

/// Unreadable or malformed input file or option value.
class ParseError : public ContractViolation {
 public:
  using ContractViolation::ContractViolation;
};

namespace detail {

inline Eigen::MatrixXd read_real_array(const nlohmann::json& doc, const std::string& field,
                                       int n, int m) {
  if (!doc.contains(field)) throw ParseError("pencil file: missing field '" + field + "'");
  const auto& rows = doc.at(field);
  if (!rows.is_array() || static_cast<int>(rows.size()) != n) {
    throw ParseError("pencil file: field '" + field + "' must be an array of " +
                     std::to_string(n) + " rows");
  }
  Eigen::MatrixXd out(n, m);
  for (int i = 0; i < n; ++i) {
    const auto& row = rows[i];
    if (!row.is_array() || static_cast<int>(row.size()) != m) {
      throw ParseError("pencil file: field '" + field + "' row " + std::to_string(i) +
                       " must have " + std::to_string(m) + " entries");
    }
    for (int j = 0; j < m; ++j) {
      if (!row[j].is_number()) {
        throw ParseError("pencil file: field '" + field + "' entry (" + std::to_string(i) +
                         ", " + std::to_string(j) + ") is not a number");
      }
      const double v = row[j].get<double>();
      if (!std::isfinite(v)) {
        throw ParseError("pencil file: field '" + field + "' entry (" + std::to_string(i) +
                         ", " + std::to_string(j) + ") is not finite");
      }
      out(i, j) = v;
    }
  }
  return out;
}

inline int read_dim(const nlohmann::json& doc, const std::string& field) {
  if (!doc.contains(field) || !doc.at(field).is_number_integer()) {
    throw ParseError("pencil file: field '" + field + "' must be an integer");
  }
  const int v = doc.at(field).get<int>();
  if (v < 1) throw ParseError("pencil file: field '" + field + "' must be >= 1");
  return v;
}

}  // namespace detail

inline MatrixPencil pencil_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("pencil file: top level must be an object");
  const int n = detail::read_dim(doc, "n");
  const int m = detail::read_dim(doc, "m");
  if (n < m) throw ParseError("pencil file: need n >= m, got n = " + std::to_string(n) +
                              ", m = " + std::to_string(m));
  const ComplexMatrix a = detail::read_real_array(doc, "A_re", n, m).cast<Complex>() +
                          Complex(0, 1) * detail::read_real_array(doc, "A_im", n, m).cast<Complex>();
  const ComplexMatrix b = detail::read_real_array(doc, "B_re", n, m).cast<Complex>() +
                          Complex(0, 1) * detail::read_real_array(doc, "B_im", n, m).cast<Complex>();
  return MatrixPencil(a, b);
}

inline MatrixPencil parse_pencil(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open pencil file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("pencil file '" + path + "': malformed JSON: " + e.what());
  }
  return pencil_from_json(doc);
}

// ---------------------------------------------------------------------------
// Deterministic JSON output

namespace detail {

inline std::string format_number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void dump_json(std::ostream& os, const nlohmann::ordered_json& j, int indent,
                      int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case nlohmann::ordered_json::value_t::number_float:
      os << format_number(j.get<double>());
      return;
    case nlohmann::ordered_json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << nlohmann::ordered_json(it.key()).dump() << ": ";
        dump_json(os, it.value(), indent, depth + 1);
      }
      os << "\n" << close << "}";
      return;
    }
    case nlohmann::ordered_json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      const bool flat = std::all_of(j.begin(), j.end(),
                                    [](const auto& e) { return e.is_primitive(); });
      if (flat) {
        os << "[";
        for (std::size_t k = 0; k < j.size(); ++k) {
          if (k) os << ", ";
          dump_json(os, j[k], indent, depth + 1);
        }
        os << "]";
        return;
      }
      os << "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) os << ",\n";
        os << pad;
        dump_json(os, j[k], indent, depth + 1);
      }
      os << "\n" << close << "]";
      return;
    }
    default:
      os << j.dump();
  }
}

inline nlohmann::ordered_json real_rows(const Eigen::MatrixXd& m) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::ordered_json complex_json(Complex z) {
  nlohmann::ordered_json o;
  o["re"] = z.real();
  o["im"] = z.imag();
  return o;
}

}  // namespace detail

inline std::string dump_json(const nlohmann::ordered_json& j) {
  std::ostringstream os;
  detail::dump_json(os, j, 2, 0);
  os << "\n";
  return os.str();
}

inline nlohmann::ordered_json pencil_to_json(const MatrixPencil& p) {
  nlohmann::ordered_json o;
  o["n"] = p.rows();
  o["m"] = p.cols();
  o["A_re"] = detail::real_rows(p.a().real());
  o["A_im"] = detail::real_rows(p.a().imag());
  o["B_re"] = detail::real_rows(p.b().real());
  o["B_im"] = detail::real_rows(p.b().imag());
  return o;
}

inline void write_pencil(const std::string& path, const MatrixPencil& p) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << dump_json(pencil_to_json(p));
}

inline nlohmann::ordered_json result_to_json(const DistanceResult& res) {
  using nlohmann::ordered_json;
  ordered_json o;
  o["tau"] = res.tau;
  o["kappa"] = res.kappa;
  o["verified"] = res.verified;
  ordered_json mu = ordered_json::array();
  for (int j = 0; j < res.mu_star.size(); ++j) mu.push_back(detail::complex_json(res.mu_star(j)));
  o["mu_star"] = mu;
  ordered_json gamma = ordered_json::array();
  const int r = res.gamma_star.r();
  for (int l = 0; l < r; ++l) {
    for (int j = l + 1; j < r; ++j) {
      ordered_json g;
      g["j"] = j + 1;
      g["l"] = l + 1;
      g["re"] = res.gamma_star(j, l).real();
      g["im"] = res.gamma_star(j, l).imag();
      gamma.push_back(std::move(g));
    }
  }
  o["gamma_star"] = gamma;
  ordered_json da;
  da["re"] = detail::real_rows(res.delta_A.real());
  da["im"] = detail::real_rows(res.delta_A.imag());
  da["norm2"] = res.delta_A.size() ? norm2(res.delta_A) : 0.0;
  o["delta_A"] = da;
  ordered_json q;
  q["mult_ok"] = res.mult_ok;
  q["li_ok"] = res.li_ok;
  q["gap"] = res.eval.gap;
  q["li_smallest_sv"] = res.eval.li_smallest_sv;
  o["qualifications"] = q;
  ordered_json sv = ordered_json::array();
  for (Eigen::Index k = 0; k < res.eval.singular_values.size(); ++k) {
    sv.push_back(res.eval.singular_values(k));
  }
  o["singular_values"] = sv;

  const VerificationReport& v = res.verification;
  ordered_json ver;
  ver["passed"] = v.passed;
  ver["rank_ok"] = v.rank_ok;
  ver["eigen_ok"] = v.eigen_ok;
  ver["region_ok"] = v.region_ok;
  ver["norm_ok"] = v.norm_ok;
  ver["delta_norm"] = v.delta_norm;
  ver["rank_sigma1"] = v.rank_sigma1;
  ordered_json rs = ordered_json::array();
  for (Eigen::Index k = 0; k < v.rank_singular_values.size(); ++k) {
    rs.push_back(v.rank_singular_values(k));
  }
  ver["rank_singular_values"] = rs;
  ordered_json matches = ordered_json::array();
  for (const auto& mt : v.matches) {
    ordered_json e;
    e["target"] = detail::complex_json(mt.target);
    e["achieved"] = detail::complex_json(mt.achieved);
    e["residual"] = mt.residual;
    e["ok"] = mt.ok;
    matches.push_back(std::move(e));
  }
  ver["matches"] = matches;
  ordered_json eigs = ordered_json::array();
  for (Complex z : v.perturbed_finite_eigenvalues) eigs.push_back(detail::complex_json(z));
  ver["perturbed_finite_eigenvalues"] = eigs;
  ver["perturbed_infinite_count"] = v.perturbed_infinite_count;
  o["verification"] = ver;

  const DistanceDiagnostics& d = res.diagnostics;
  ordered_json diag;
  diag["outer_evals"] = d.outer_evals;
  diag["inner_evaluations"] = d.inner_evaluations;
  diag["restarts"] = d.restarts;
  diag["inner_converged"] = d.inner_converged;
  diag["lower_bound"] = d.lower_bound;
  diag["candidates_tried"] = d.candidates_tried;
  diag["stop_reason"] = d.stop_reason;
  o["diagnostics"] = diag;
  return o;
}

// ---------------------------------------------------------------------------
// Jobs

enum class JobMode { kSet, kRegionBox, kRegionLhp, kComplete, kPseudospectra };

inline JobMode parse_mode(const std::string& s) {
  if (s == "set") return JobMode::kSet;
  if (s == "region-box") return JobMode::kRegionBox;
  if (s == "region-lhp") return JobMode::kRegionLhp;
  if (s == "complete") return JobMode::kComplete;
  if (s == "pseudospectra") return JobMode::kPseudospectra;
  throw ParseError("unknown mode '" + s +
                   "' (expected set, region-box, region-lhp, complete or pseudospectra)");
}

inline std::string mode_name(JobMode m) {
  switch (m) {
    case JobMode::kSet: return "set";
    case JobMode::kRegionBox: return "region-box";
    case JobMode::kRegionLhp: return "region-lhp";
    case JobMode::kComplete: return "complete";
    case JobMode::kPseudospectra: return "pseudospectra";
  }
  return "";
}

/// Parses one complex number: "1.5", "-2i", "0.3-4e-2i", "i".
inline Complex parse_complex(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  }
  if (s.empty()) throw ParseError("empty complex number");
  const std::string real = R"(([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?))";
  const std::string imag = R"(([+-]?(?:(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?)[ij])";
  std::smatch mt;
  if (std::regex_match(s, mt, std::regex(real))) return {std::stod(mt[1]), 0.0};
  auto im_value = [](const std::string& t) {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    return std::stod(t);
  };
  if (std::regex_match(s, mt, std::regex(imag))) return {0.0, im_value(mt[1])};
  if (std::regex_match(s, mt, std::regex(real + imag))) {
    const std::string im = mt[2];
    if (im.empty() || (im[0] != '+' && im[0] != '-')) {
      throw ParseError("malformed complex number '" + text + "'");
    }
    return {std::stod(mt[1]), im_value(im)};
  }
  throw ParseError("malformed complex number '" + text + "'");
}

inline std::vector<Complex> parse_complex_list(const std::string& text) {
  std::vector<Complex> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_complex(item));
  if (out.empty()) throw ParseError("empty target list");
  return out;
}

inline std::vector<double> parse_numbers(const std::string& text, std::size_t count,
                                         const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ParseError(what + ": '" + item + "' is not a number");
    }
  }
  if (out.size() != count) {
    throw ParseError(what + ": expected " + std::to_string(count) + " comma-separated values");
  }
  return out;
}

/// (re0, re1, im0, im1) -> Box over (Re, Im).
inline Box plane_box(const std::vector<double>& v) {
  detail::require(v.size() == 4, "box needs re0,re1,im0,im1");
  if (!(v[0] < v[1] && v[2] < v[3])) throw ParseError("box: need re0 < re1 and im0 < im1");
  RealVector lo(2), hi(2);
  lo << v[0], v[2];
  hi << v[1], v[3];
  return Box(lo, hi);
}

struct JobConfig {
  std::string pencil_path;
  JobMode mode = JobMode::kSet;
  int r = 1;
  std::vector<Complex> targets;
  std::optional<Box> box;
  std::optional<std::pair<int, int>> grid;
  std::optional<int> max_evals;
  std::optional<double> tol;
  bool coincident = false;
  int threads = 1;
  std::string out_path;
};

/// Exit codes of the executable.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInvalid = 2;

inline DistanceOptions job_options(const JobConfig& cfg) {
  DistanceOptions opt;
  if (cfg.max_evals) {
    if (*cfg.max_evals < 1) throw ParseError("--max-evals must be >= 1");
    opt.outer.max_evals = *cfg.max_evals;
    opt.refine_evals = std::max(1, *cfg.max_evals / 5);
  }
  if (cfg.tol) {
    if (!(*cfg.tol > 0.0)) throw ParseError("--tol must be positive");
    opt.verify_tol = *cfg.tol;
  }
  if (cfg.threads < 1) throw ParseError("--threads must be >= 1");
  opt.outer.threads = cfg.threads;
  opt.coincident = cfg.coincident;
  return opt;
}

/// Runs the distance query and writes the result JSON. Never throws.
inline int run_job(const JobConfig& cfg, std::ostream& err = std::cerr) {
  try {
    const MatrixPencil pencil = parse_pencil(cfg.pencil_path);
    const DistanceOptions opt = job_options(cfg);
    if (cfg.r < 1) throw ParseError("--r must be >= 1");
    DistanceResult res;
    switch (cfg.mode) {
      case JobMode::kSet:
        if (cfg.targets.empty()) throw ParseError("mode set requires --targets");
        res = tau_specified_set(pencil, cfg.r, FiniteSet{cfg.targets}, opt);
        break;
      case JobMode::kRegionBox:
        if (!cfg.box) throw ParseError("mode region-box requires --box");
        res = tau_region(pencil, cfg.r, BoxRegion{*cfg.box}, opt);
        break;
      case JobMode::kRegionLhp: {
        Box b = cfg.box ? *cfg.box : default_search_box(pencil, cfg.r, opt.rank_tol);
        if (b.lower(0) >= 0.0) b.lower(0) = -(b.upper(0) - b.lower(0));
        res = tau_region(pencil, cfg.r, LeftHalfPlane{b}, opt);
        break;
      }
      case JobMode::kComplete:
        res = tau_complete(pencil, cfg.r, WholePlane{cfg.box}, opt);
        break;
      case JobMode::kPseudospectra:
        throw ParseError("mode pseudospectra is handled by run_pseudospectra");
    }
    nlohmann::ordered_json doc;
    doc["mode"] = mode_name(cfg.mode);
    doc["r"] = cfg.r;
    doc["n"] = pencil.rows();
    doc["m"] = pencil.cols();
    const nlohmann::ordered_json body = result_to_json(res);
    for (const auto& [k, v] : body.items()) doc[k] = v;
    const std::string text = dump_json(doc);
    if (cfg.out_path.empty() || cfg.out_path == "-") {
      std::cout << text;
    } else {
      std::ofstream out(cfg.out_path);
      if (!out) throw ParseError("cannot write '" + cfg.out_path + "'");
      out << text;
    }
    if (!res.verified) err << "warning: result did not pass verification\n";
    return kExitOk;
  } catch (const IllPosedError& e) {
    err << "ill-posed: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ContractViolation& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

/// Writes the sigma_min grid as CSV. Never throws.
inline int run_pseudospectra(const JobConfig& cfg, std::ostream& err = std::cerr) {
  try {
    const MatrixPencil pencil = parse_pencil(cfg.pencil_path);
    if (!cfg.box) throw ParseError("mode pseudospectra requires --box");
    if (!cfg.grid) throw ParseError("mode pseudospectra requires --grid");
    if (cfg.threads < 1) throw ParseError("--threads must be >= 1");
    const GridSpec spec{*cfg.box, cfg.grid->first, cfg.grid->second};
    const PseudospectrumGrid grid = compute_grid(pencil, spec, cfg.threads);
    if (cfg.out_path.empty() || cfg.out_path == "-") {
      write_csv(std::cout, grid);
    } else {
      std::ofstream out(cfg.out_path);
      if (!out) throw ParseError("cannot write '" + cfg.out_path + "'");
      write_csv(out, grid);
    }
    return kExitOk;
  } catch (const ContractViolation& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace nearpencil
