#ifndef HOUSEHT_TOOLS_SUITE_HPP
#define HOUSEHT_TOOLS_SUITE_HPP

#include <chrono>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <househt/househt.hpp>

namespace househt::tools {

enum class Algo { basic, blocked, givens };

inline const char* algo_name(Algo a) {
  switch (a) {
    case Algo::basic: return "basic";
    case Algo::blocked: return "blocked";
    case Algo::givens: return "givens";
  }
  return "?";
}

inline Algo parse_algo(const std::string& s) {
  if (s == "basic") return Algo::basic;
  if (s == "blocked") return Algo::blocked;
  if (s == "givens") return Algo::givens;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

/// One reduction with its verification, as written to the CSV.
struct BenchRow {
  Index n = 0;
  std::string algo;
  Index nb = 0, ell = 0;
  bool preprocess = false;
  std::uint64_t flops = 0;
  double ir_extra_pct = 0, ir_failed_pct = 0, ir_avg_steps = 0;
  Index absorptions = 0, premature_absorptions = 0;
  double residual_a = 0, residual_b = 0, orth_q = 0, orth_z = 0;
  double wall_ms = 0;
  bool pass = false;
};

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> c{"n",           "algo",          "nb",           "ell",
                                          "preprocess",  "flops",         "ir_extra_pct", "ir_failed_pct",
                                          "ir_avg_steps", "absorptions",  "premature_absorptions",
                                          "residual_a",  "residual_b",    "orth_q",       "orth_z",
                                          "wall_ms"};
  return c;
}

/// Runs one algorithm; ReductionReport residual fields are filled from the verifier.
inline HtResult run_algo(const Pencil& p, Algo algo, const HtConfig& cfg, bool preprocess) {
  switch (algo) {
    case Algo::basic: return reduce_basic(p.A, p.B, cfg.seed);
    case Algo::givens: return reduce_givens(p.A, p.B);
    case Algo::blocked: return preprocess ? reduce_with_preprocessing(p.A, p.B, cfg) : house_ht(p.A, p.B, cfg);
  }
  return {};
}

inline BenchRow bench_one(const Pencil& p, Algo algo, const HtConfig& cfg, bool preprocess,
                          HtResult* keep = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  HtResult r = run_algo(p, algo, cfg, preprocess);
  const auto t1 = std::chrono::steady_clock::now();
  VerificationResult v = verify(p.A, p.B, r);
  r.report.residual_a = v.residual_a;
  r.report.residual_b = v.residual_b;
  r.report.orth_q = v.orth_q;
  r.report.orth_z = v.orth_z;

  BenchRow row;
  row.n = p.A.rows();
  row.algo = algo_name(algo);
  const bool blocked = algo == Algo::blocked;
  row.nb = blocked ? cfg.nb : 0;
  row.ell = blocked ? (cfg.accelerated ? cfg.ell : 2) : 0;
  row.preprocess = blocked && preprocess;
  row.flops = r.report.flops;
  const double n = row.n > 0 ? double(row.n) : 1.0;
  row.ir_extra_pct = 100.0 * double(r.report.ir_extra_columns) / n;
  row.ir_failed_pct = 100.0 * double(r.report.ir_failed_columns) / n;
  row.ir_avg_steps = double(r.report.ir_steps_total) / n;
  row.absorptions = r.report.absorptions;
  row.premature_absorptions = r.report.premature_absorptions;
  row.residual_a = v.residual_a;
  row.residual_b = v.residual_b;
  row.orth_q = v.orth_q;
  row.orth_z = v.orth_z;
  row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  row.pass = v.pass;
  if (keep) *keep = std::move(r);
  return row;
}

inline std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline void write_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\r\n";
  for (const BenchRow& r : rows) {
    out << r.n << ',' << r.algo << ',' << r.nb << ',' << r.ell << ',' << (r.preprocess ? "true" : "false") << ','
        << r.flops << ',' << fmt_double(r.ir_extra_pct) << ',' << fmt_double(r.ir_failed_pct) << ','
        << fmt_double(r.ir_avg_steps) << ',' << r.absorptions << ',' << r.premature_absorptions << ','
        << fmt_double(r.residual_a) << ',' << fmt_double(r.residual_b) << ',' << fmt_double(r.orth_q) << ','
        << fmt_double(r.orth_z) << ',' << fmt_double(r.wall_ms) << "\r\n";
  }
}

inline nlohmann::json to_json(const BenchRow& r) {
  return {{"n", r.n},
          {"algo", r.algo},
          {"nb", r.nb},
          {"ell", r.ell},
          {"preprocess", r.preprocess},
          {"flops", r.flops},
          {"ir_extra_pct", r.ir_extra_pct},
          {"ir_failed_pct", r.ir_failed_pct},
          {"ir_avg_steps", r.ir_avg_steps},
          {"absorptions", r.absorptions},
          {"premature_absorptions", r.premature_absorptions},
          {"residual_a", r.residual_a},
          {"residual_b", r.residual_b},
          {"orth_q", r.orth_q},
          {"orth_z", r.orth_z},
          {"wall_ms", r.wall_ms},
          {"pass", r.pass}};
}

inline void write_json(std::ostream& out, const std::vector<BenchRow>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const BenchRow& r : rows) j.push_back(to_json(r));
  out << j.dump(2) << '\n';
}

struct SuiteSpec {
  std::string kind = "random";  // random | saddlepoint | files
  std::vector<Index> sizes;
  std::vector<Algo> algos{Algo::basic, Algo::blocked, Algo::givens};
  std::vector<bool> preprocess{false};
  std::string a_path, b_path;
  HtConfig cfg;
};

/// Runs every (instance, algorithm, preprocessing) combination in order.
inline std::vector<BenchRow> run_suite(const SuiteSpec& s) {
  std::vector<Pencil> pencils;
  if (s.kind == "files") {
    pencils.push_back({mm_read(s.a_path), mm_read(s.b_path)});
  } else {
    for (Index n : s.sizes)
      pencils.push_back(s.kind == "saddlepoint" ? gen_saddlepoint(n, s.cfg.seed) : gen_random_pencil(n, s.cfg.seed));
  }
  std::vector<BenchRow> rows;
  for (const Pencil& p : pencils)
    for (Algo a : s.algos)
      for (bool pre : s.preprocess) {
        if (pre && a != Algo::blocked) continue;
        rows.push_back(bench_one(p, a, s.cfg, pre));
      }
  return rows;
}

} // namespace househt::tools

#endif
