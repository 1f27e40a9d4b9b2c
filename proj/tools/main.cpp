#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "suite.hpp"

using namespace househt;
using namespace househt::tools;

namespace {

enum Exit { ok = 0, verify_failed = 1, usage = 2, numerical = 3 };

struct Options {
  Index n = 100;
  std::vector<Index> sizes;
  std::uint64_t seed = 0;
  std::string kind = "random";
  std::vector<std::string> algos;
  Index nb = 32, ell = 4;
  bool no_accel = false, preprocess = false, both = false;
  std::string a, b, out_prefix = "pencil", csv, json;
};

HtConfig config_of(const Options& o) {
  HtConfig c;
  c.nb = o.nb;
  c.ell = o.ell;
  c.seed = o.seed;
  c.accelerated = !o.no_accel;
  return c;
}

void print_verification(const VerificationResult& v) {
  std::printf("residual_a %.3e\nresidual_b %.3e\north_q %.3e\north_z %.3e\n", v.residual_a, v.residual_b, v.orth_q,
              v.orth_z);
  std::printf("hessenberg_defect %.3e\ntriangular_defect %.3e\nthreshold %.3e\n", v.hessenberg_defect,
              v.triangular_defect, v.threshold);
  if (v.det_checked) std::printf("det_rel_error %.3e\n", v.det_rel_error);
  std::printf("%s\n", v.pass ? "PASS" : "FAIL");
}

int cmd_generate(const Options& o) {
  Pencil p = o.kind == "saddlepoint" ? gen_saddlepoint(o.n, o.seed) : gen_random_pencil(o.n, o.seed);
  mm_write(o.out_prefix + "_A.mtx", p.A);
  mm_write(o.out_prefix + "_B.mtx", p.B);
  std::printf("wrote %s_A.mtx %s_B.mtx\n", o.out_prefix.c_str(), o.out_prefix.c_str());
  return ok;
}

int cmd_reduce(const Options& o) {
  Pencil p{mm_read(o.a), mm_read(o.b)};
  const Algo algo = parse_algo(o.algos.empty() ? "blocked" : o.algos.front());
  HtResult r;
  BenchRow row = bench_one(p, algo, config_of(o), o.preprocess, &r);
  mm_write(o.out_prefix + "_H.mtx", r.H);
  mm_write(o.out_prefix + "_T.mtx", r.T);
  mm_write(o.out_prefix + "_Q.mtx", r.Q);
  mm_write(o.out_prefix + "_Z.mtx", r.Z);
  write_csv(std::cout, {row});
  return row.pass ? ok : verify_failed;
}

int cmd_verify(const Options& o) {
  DenseMatrix A = mm_read(o.a), B = mm_read(o.b);
  DenseMatrix H = mm_read(o.out_prefix + "_H.mtx"), T = mm_read(o.out_prefix + "_T.mtx");
  DenseMatrix Q = mm_read(o.out_prefix + "_Q.mtx"), Z = mm_read(o.out_prefix + "_Z.mtx");
  VerificationResult v = verify(A, B, H, T, Q, Z);
  print_verification(v);
  return v.pass ? ok : verify_failed;
}

int cmd_bench(const Options& o) {
  SuiteSpec s;
  s.kind = o.kind;
  s.sizes = o.sizes.empty() ? std::vector<Index>{o.n} : o.sizes;
  if (!o.algos.empty()) {
    s.algos.clear();
    for (const std::string& a : o.algos) s.algos.push_back(parse_algo(a));
  }
  s.preprocess = o.both ? std::vector<bool>{false, true} : std::vector<bool>{o.preprocess};
  s.a_path = o.a;
  s.b_path = o.b;
  s.cfg = config_of(o);
  std::vector<BenchRow> rows = run_suite(s);
  write_csv(std::cout, rows);
  if (!o.csv.empty()) {
    std::ofstream f(o.csv);
    write_csv(f, rows);
    if (!f) throw std::runtime_error("cannot write '" + o.csv + "'");
  }
  if (!o.json.empty()) {
    std::ofstream f(o.json);
    write_json(f, rows);
    if (!f) throw std::runtime_error("cannot write '" + o.json + "'");
  }
  bool all = true;
  for (const BenchRow& r : rows) all = all && r.pass;
  return all ? ok : verify_failed;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hessenberg-triangular reduction driver"};
  app.require_subcommand(1);
  Options o;

  auto add_config = [&](CLI::App* c) {
    c->add_option("--nb", o.nb, "panel width")->check(CLI::PositiveNumber);
    c->add_option("--ell", o.ell, "absorption block factor")->check(CLI::Range(2, 1 << 20));
    c->add_flag("--no-accel", o.no_accel, "plain absorption sweeps");
    c->add_flag("--preprocess", o.preprocess, "deflate zero columns of B first");
    c->add_option("--seed", o.seed, "random seed");
  };

  CLI::App* gen = app.add_subcommand("generate", "write a test pencil in Matrix Market format");
  gen->add_option("--n", o.n, "dimension")->check(CLI::PositiveNumber);
  gen->add_option("--seed", o.seed, "random seed");
  gen->add_option("--kind", o.kind, "random | saddlepoint")->check(CLI::IsMember({"random", "saddlepoint"}));
  gen->add_option("--out-prefix", o.out_prefix, "output file prefix");

  CLI::App* red = app.add_subcommand("reduce", "reduce a pencil read from files");
  red->add_option("--a", o.a, "A in Matrix Market format")->required();
  red->add_option("--b", o.b, "B in Matrix Market format")->required();
  red->add_option("--algo", o.algos, "basic | blocked | givens")->expected(1);
  red->add_option("--out-prefix", o.out_prefix, "prefix for H, T, Q, Z");
  add_config(red);

  CLI::App* ver = app.add_subcommand("verify", "check a stored reduction");
  ver->add_option("--a", o.a)->required();
  ver->add_option("--b", o.b)->required();
  ver->add_option("--out-prefix", o.out_prefix, "prefix of H, T, Q, Z");

  CLI::App* ben = app.add_subcommand("bench", "run a suite and report CSV/JSON");
  ben->add_option("--kind", o.kind, "random | saddlepoint | files")
      ->check(CLI::IsMember({"random", "saddlepoint", "files"}));
  ben->add_option("--n", o.sizes, "sizes, comma separated")->delimiter(',');
  ben->add_option("--algo", o.algos, "algorithms, comma separated")->delimiter(',');
  ben->add_option("--a", o.a, "A file for --kind files");
  ben->add_option("--b", o.b, "B file for --kind files");
  ben->add_flag("--both", o.both, "run the blocked algorithm with and without preprocessing");
  ben->add_option("--csv", o.csv, "CSV output path");
  ben->add_option("--json", o.json, "JSON output path");
  add_config(ben);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : usage;
  }

  try {
    if (*gen) return cmd_generate(o);
    if (*red) return cmd_reduce(o);
    if (*ver) return cmd_verify(o);
    if (*ben) {
      if (o.kind == "files" && (o.a.empty() || o.b.empty())) {
        std::cerr << "bench --kind files needs --a and --b\n";
        return usage;
      }
      return cmd_bench(o);
    }
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return numerical;
  } catch (const SingularSystem& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return numerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage;
  }
  return usage;
}
