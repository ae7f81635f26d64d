// finsler_lab: identity checks, curvature quantities and the Schur audit for
// Finsler metrics given by zoo id or expression.
//
//   finsler_lab check --metric randers --dim 3 --seed 42 --samples 50
//   finsler_lab curvature --metric funk --dim 3 --x 0,0,0 --y 0,0,2
//   finsler_lab audit --metric funk --dim 3 --base-points 5
//   finsler_lab zoo

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "finsler/report.hpp"

using namespace finsler;

namespace {

struct Flags {
  std::string metric, metric_expr, volume, out, format, config;
  int dim{0}, samples{0}, base_points{0};
  std::uint64_t seed{0};
  unsigned threads{0};
  std::vector<std::string> params;
  std::vector<double> x, y;
  std::map<std::string, double> tol;
};

void add_common(CLI::App* cmd, Flags& f, bool sampling, bool point) {
  cmd->add_option("--metric", f.metric, "zoo id (see `zoo`)");
  cmd->add_option("--metric-expr", f.metric_expr, "F(x, y) as an expression in x1.., y1..");
  cmd->add_option("--dim", f.dim, "dimension n (2-4)");
  cmd->add_option("--volume", f.volume, "lebesgue | bh | auto | expr:<sigma(x)>");
  cmd->add_option("--params", f.params, "k=v parameter bindings")->expected(1, -1);
  cmd->add_option("--seed", f.seed, "RNG seed");
  cmd->add_option("--out", f.out, "report path (default: standard output)");
  cmd->add_option("--format", f.format, "json | csv");
  cmd->add_option("--config", f.config, "JSON config; flags override it");
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
  if (sampling) {
    cmd->add_option("--samples", f.samples, "fibre points per base point");
    cmd->add_option("--base-points", f.base_points, "base points");
    for (const auto& tag : tolerance_tags()) cmd->add_option("--tol-" + tag, f.tol[tag], "tolerance for " + tag);
  }
  if (point) {
    cmd->add_option("--x", f.x, "base point, comma separated")->delimiter(',');
    cmd->add_option("--y", f.y, "tangent vector, comma separated")->delimiter(',');
  }
}

bool given(const CLI::App* cmd, const std::string& name) {
  try {
    return cmd->get_option(name)->count() > 0;
  } catch (const CLI::OptionNotFound&) {
    return false;
  }
}

RunConfig build_config(const CLI::App* cmd, const Flags& f) {
  RunConfig cfg;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw InvalidInput("--config: cannot read " + f.config);
    std::stringstream text;
    text << in.rdbuf();
    merge_config_json(cfg, text.str());
  }
  cfg.command = cmd->get_name();
  if (given(cmd, "--metric")) {
    cfg.metric = f.metric;
    cfg.metric_expr.reset();
  }
  if (given(cmd, "--metric-expr")) {
    cfg.metric_expr = f.metric_expr;
    if (!given(cmd, "--metric")) cfg.metric.reset();
  }
  if (given(cmd, "--dim")) cfg.dim = f.dim;
  if (given(cmd, "--volume")) cfg.volume = f.volume;
  if (given(cmd, "--seed")) cfg.seed = f.seed;
  if (given(cmd, "--out")) cfg.out = f.out;
  if (given(cmd, "--format")) cfg.format = f.format;
  if (given(cmd, "--threads")) cfg.threads = f.threads;
  if (given(cmd, "--samples")) cfg.samples = f.samples;
  if (given(cmd, "--base-points")) cfg.base_points = f.base_points;
  if (given(cmd, "--x")) cfg.x = f.x;
  if (given(cmd, "--y")) cfg.y = f.y;
  for (const auto& kv : f.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidInput("--params: expected k=v, got '" + kv + "'");
    cfg.params[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  for (const auto& tag : tolerance_tags()) {
    if (given(cmd, "--tol-" + tag)) cfg.tolerances[tag] = f.tol.at(tag);
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fibre identities, curvature and Schur audit for Finsler metrics"};
  app.require_subcommand(1);
  Flags f;
  add_common(app.add_subcommand("check", "residuals of the fibre structure equations"), f, true, false);
  add_common(app.add_subcommand("curvature", "tensors at a flag point"), f, false, true);
  add_common(app.add_subcommand("audit", "Schur audit and weak isotropy per base point"), f, true, false);
  auto* zoo = app.add_subcommand("zoo", "list built-in metrics");
  zoo->add_option("--format", f.format, "json | csv");
  zoo->add_option("--out", f.out, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CommandResult res;
  RunConfig cfg;
  try {
    cfg = build_config(app.get_subcommands().front(), f);
    res = run_command(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  if (!res.output.empty()) {
    if (cfg.out.empty()) {
      std::cout << res.output;
    } else {
      std::ofstream file(cfg.out, std::ios::binary);
      file << res.output;
      if (!file) {
        std::cerr << "error: --out: cannot write " << cfg.out << "\n";
        return 2;
      }
    }
  }
  std::cerr << res.diagnostic;
  return res.exit_code;
}
