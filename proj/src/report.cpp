#include "finsler/report.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"

#include "finsler/finsler_core.hpp"
#include "finsler/indicatrix.hpp"

namespace finsler {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json vector_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ordered_json matrix_json(const Eigen::MatrixXd& m) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vector_json(m.row(i).transpose()));
  return a;
}

// Nested arrays, first index outermost.
ordered_json tensor_json(const Tensor<double>& t, std::size_t offset = 0, int level = 0) {
  if (level == t.rank()) return t.data()[offset];
  std::size_t stride = 1;
  for (int r = level + 1; r < t.rank(); ++r) stride *= static_cast<std::size_t>(t.dim());
  ordered_json a = ordered_json::array();
  for (int i = 0; i < t.dim(); ++i) a.push_back(tensor_json(t, offset + static_cast<std::size_t>(i) * stride, level + 1));
  return a;
}

// Non-finite values (failed points) serialize as null.
ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

std::string joined(const Eigen::VectorXd& v) {
  std::ostringstream s;
  s.precision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) s << (i ? " " : "") << v[i];
  return s.str();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

Tolerances effective_tolerances(const RunConfig& cfg) {
  Tolerances t = default_tolerances();
  for (const auto& [k, v] : cfg.tolerances) t[k] = v;
  return t;
}

// Everything that determines the result; the output path and thread count do not.
ordered_json config_echo(const RunConfig& cfg, const MetricModel* model) {
  ordered_json c;
  if (cfg.metric) c["metric"] = canonical_zoo_id(*cfg.metric);
  if (cfg.metric_expr) c["metric_expr"] = *cfg.metric_expr;
  c["dim"] = cfg.dim;
  c["volume"] = cfg.volume;
  ordered_json p = ordered_json::object();
  for (const auto& [k, v] : cfg.params) p[k] = v;
  c["params"] = p;
  c["seed"] = cfg.seed;
  c["base_points"] = cfg.base_points;
  c["samples"] = cfg.samples;
  ordered_json tol = ordered_json::object();
  for (const auto& [k, v] : effective_tolerances(cfg)) tol[k] = v;
  c["tolerances"] = tol;
  if (model) c["F"] = model->F.str();
  return c;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

std::string render(const ordered_json& doc) { return doc.dump(2) + "\n"; }

}  // namespace

const std::vector<std::string>& tolerance_tags() {
  static const std::vector<std::string> tags = {"eq-1.11", "eq-1.12", "eq-2.1", "eq-2.2", "thm-1"};
  return tags;
}

void merge_config_json(RunConfig& cfg, std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidInput("config: top level must be an object");
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "command") cfg.command = value.get<std::string>();
      else if (key == "metric") cfg.metric = value.get<std::string>();
      else if (key == "metric_expr") cfg.metric_expr = value.get<std::string>();
      else if (key == "dim") cfg.dim = value.get<int>();
      else if (key == "volume") cfg.volume = value.get<std::string>();
      else if (key == "samples") cfg.samples = value.get<int>();
      else if (key == "base_points") cfg.base_points = value.get<int>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "out") cfg.out = value.get<std::string>();
      else if (key == "format") cfg.format = value.get<std::string>();
      else if (key == "threads") cfg.threads = value.get<unsigned>();
      else if (key == "x") cfg.x = value.get<std::vector<double>>();
      else if (key == "y") cfg.y = value.get<std::vector<double>>();
      else if (key == "params") {
        for (const auto& [k, v] : value.items()) cfg.params[k] = v.is_string() ? v.get<std::string>() : v.dump();
      } else if (key == "tolerances") {
        for (const auto& [k, v] : value.items()) cfg.tolerances[k] = v.get<double>();
      } else {
        throw InvalidInput("config." + key + ": unknown key");
      }
    } catch (const json::exception& e) {
      throw InvalidInput("config." + key + ": " + e.what());
    }
  }
}

void validate(const RunConfig& cfg) {
  static const std::vector<std::string> commands = {"check", "curvature", "audit", "zoo"};
  if (std::find(commands.begin(), commands.end(), cfg.command) == commands.end()) {
    throw InvalidInput("command: expected check, curvature, audit or zoo");
  }
  if (cfg.format != "json" && cfg.format != "csv") throw InvalidInput("--format: expected json or csv");
  if (cfg.command == "zoo") return;
  if (cfg.metric.has_value() == cfg.metric_expr.has_value()) {
    throw InvalidInput("--metric: give exactly one of --metric or --metric-expr");
  }
  if (cfg.dim < 2 || cfg.dim > 4) throw InvalidInput("--dim: must be 2, 3 or 4");
  if (cfg.samples < 1 || cfg.samples > 100000) throw InvalidInput("--samples: must be in [1, 100000]");
  if (cfg.base_points < 1 || cfg.base_points > 10000) throw InvalidInput("--base-points: must be in [1, 10000]");
  for (const auto& [tag, v] : cfg.tolerances) {
    const auto& tags = tolerance_tags();
    if (std::find(tags.begin(), tags.end(), tag) == tags.end()) throw InvalidInput("--tol-" + tag + ": unknown tag");
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput("--tol-" + tag + ": must be a finite value >= 0");
  }
  const std::string& vol = cfg.volume;
  if (vol != "lebesgue" && vol != "bh" && vol != "auto" && vol.rfind("expr:", 0) != 0) {
    throw InvalidInput("--volume: expected lebesgue, bh, auto or expr:<sigma>");
  }
  if (cfg.command == "curvature") {
    if (static_cast<int>(cfg.x.size()) != cfg.dim) throw InvalidInput("--x: needs " + std::to_string(cfg.dim) + " components");
    if (static_cast<int>(cfg.y.size()) != cfg.dim) throw InvalidInput("--y: needs " + std::to_string(cfg.dim) + " components");
  }
}

VolumeForm volume_from_config(const RunConfig& cfg) {
  if (cfg.volume == "lebesgue") return {VolumeKind::lebesgue, {}};
  if (cfg.volume == "bh") return {VolumeKind::busemann_hausdorff, {}};
  if (cfg.volume == "auto") return {VolumeKind::riemannian_auto, {}};
  std::set<std::string, std::less<>> names;
  for (const auto& [k, v] : cfg.params) names.insert(k);
  try {
    return {VolumeKind::custom, Expr::parse(cfg.volume.substr(5), cfg.dim, names)};
  } catch (const Error& e) {
    throw InvalidInput(std::string("--volume: ") + e.what());
  }
}

MetricModel model_from_config(const RunConfig& cfg) {
  const VolumeForm vol = volume_from_config(cfg);
  if (cfg.metric) return build_metric(*cfg.metric, cfg.dim, cfg.params, vol);
  try {
    return metric_from_expression(*cfg.metric_expr, cfg.dim, cfg.params, vol);
  } catch (const InvalidInput& e) {
    throw InvalidInput(std::string("--metric-expr: ") + e.what());
  } catch (const SyntaxError& e) {
    throw InvalidInput(std::string("--metric-expr: ") + e.what());
  }
}

CommandResult cmd_check(const RunConfig& cfg) {
  const MetricModel model = model_from_config(cfg);
  const SamplePlan plan{cfg.base_points, cfg.samples, cfg.seed, cfg.threads};
  const std::vector<CheckReport> reports = run_checks(model, plan, effective_tolerances(cfg));
  bool all = true;
  for (const auto& r : reports) all = all && r.pass;

  CommandResult res;
  res.exit_code = all ? 0 : 1;
  if (cfg.format == "csv") {
    std::ostringstream s;
    s << "tag,name,base,fibre,x,chart,u,residual,tolerance,pass,error\n";
    for (const auto& r : reports) {
      for (const auto& p : r.points) {
        s << r.tag << ',' << r.name << ',' << p.base << ',' << p.fibre << ',' << joined(p.x) << ','
          << to_string(p.chart) << ',' << joined(p.u) << ',' << fmt(p.residual) << ',' << fmt(r.tolerance) << ','
          << (p.residual <= r.tolerance ? "true" : "false") << ",\"" << p.error << "\"\n";
      }
    }
    res.output = s.str();
  } else {
    ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = "check";
    doc["config"] = config_echo(cfg, &model);
    ordered_json checks = ordered_json::array();
    for (const auto& r : reports) {
      ordered_json c;
      c["tag"] = r.tag;
      c["name"] = r.name;
      c["metric_id"] = r.metric_id;
      c["dim"] = r.dim;
      c["seed"] = r.seed;
      c["samples"] = r.samples;
      c["max_residual"] = number(r.max_residual);
      c["tolerance"] = r.tolerance;
      c["pass"] = r.pass;
      ordered_json pts = ordered_json::array();
      for (const auto& p : r.points) {
        ordered_json q;
        q["tag"] = r.tag;
        q["base"] = p.base;
        q["fibre"] = p.fibre;
        q["x"] = vector_json(p.x);
        q["chart"] = to_string(p.chart);
        q["u"] = vector_json(p.u);
        q["residual"] = number(p.residual);
        if (!p.error.empty()) q["error"] = p.error;
        pts.push_back(q);
      }
      c["points"] = pts;
      checks.push_back(c);
    }
    doc["checks"] = checks;
    doc["pass"] = all;
    res.output = render(doc);
  }
  if (!all) {
    for (const auto& r : reports) {
      if (!r.pass) res.diagnostic += r.tag + " failed: max residual " + fmt(r.max_residual) + " > " + fmt(r.tolerance) + "\n";
    }
  }
  return res;
}

CommandResult cmd_curvature(const RunConfig& cfg) {
  const MetricModel model = model_from_config(cfg);
  const FlagPoint p{to_vector(cfg.x), to_vector(cfg.y)};
  validate_flag_point(model, p);
  const CoordinateTensors t = coordinate_tensors(model, p);
  const IndicatrixPoint ip = chart_point(p.x, p.y.normalized());
  const RestrictedFields f = restrict_fields(model, ip);

  ordered_json q;
  q["x"] = vector_json(p.x);
  q["y"] = vector_json(p.y);
  q["F"] = t.F;
  q["g"] = matrix_json(t.g);
  q["A"] = tensor_json(t.A);
  q["G"] = vector_json(t.G);
  q["E_hat"] = matrix_json(t.E_hat);
  q["tau"] = t.tau;
  q["S"] = t.S;
  q["S_alt"] = t.S_alt;
  ordered_json fib;
  fib["y"] = vector_json(f.y);
  fib["chart"] = to_string(f.chart);
  fib["u"] = vector_json(f.u);
  fib["g_dot"] = matrix_json(f.g);
  fib["H_dot"] = tensor_json(f.H);
  fib["E_dot"] = matrix_json(f.E);
  fib["e"] = f.e;
  fib["S"] = f.S;
  q["fibre"] = fib;

  CommandResult res;
  if (cfg.format == "csv") {
    std::ostringstream s;
    s << "quantity,value\n";
    auto flatten = [&s](auto&& self, const std::string& name, const ordered_json& v) -> void {
      if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) self(self, name + "[" + std::to_string(i) + "]", v[i]);
      } else if (v.is_object()) {
        for (const auto& [k, w] : v.items()) self(self, name.empty() ? k : name + "." + k, w);
      } else if (v.is_number()) {
        s << name << ',' << fmt(v.get<double>()) << '\n';
      } else {
        s << name << ',' << v.get<std::string>() << '\n';
      }
    };
    flatten(flatten, "", q);
    res.output = s.str();
  } else {
    ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = "curvature";
    doc["config"] = config_echo(cfg, &model);
    doc["quantities"] = q;
    res.output = render(doc);
  }
  return res;
}

CommandResult cmd_audit(const RunConfig& cfg) {
  const MetricModel model = model_from_config(cfg);
  const SampleSet samples = draw_samples(model, {cfg.base_points, cfg.samples, cfg.seed, cfg.threads});
  const double tol = effective_tolerances(cfg).at("thm-1");

  struct Row {
    AuditRecord audit;
    std::optional<WeakIsotropyRecord> weak;
    bool pass{true};
  };
  std::vector<Row> rows;
  bool all = true, violation = false;
  for (std::size_t b = 0; b < samples.base.size(); ++b) {
    Row row;
    row.audit = schur_audit(model, samples.base[b], samples.fibre[b], {tol, tol}, cfg.threads);
    if (row.audit.verdict == Verdict::violation) {
      row.pass = false;
      violation = true;
    } else if (row.audit.verdict == Verdict::isotropic_and_constant) {
      row.weak = weak_isotropy_check(model, samples.base[b], samples.fibre[b],
                                     row.audit.e_mean / static_cast<double>(model.dim - 1), cfg.threads);
      row.pass = row.weak->max_hessian_residual <= tol;
    }
    all = all && row.pass;
    rows.push_back(std::move(row));
  }

  CommandResult res;
  res.exit_code = all ? 0 : 1;
  if (cfg.format == "csv") {
    std::ostringstream s;
    s << "tag,base,x,samples,max_isotropy_residual,e_mean,e_spread,max_grad_e,asserted,verdict,c,weak_residual,pass\n";
    for (std::size_t b = 0; b < rows.size(); ++b) {
      const auto& r = rows[b];
      s << "thm-1," << b << ',' << joined(r.audit.x) << ',' << r.audit.samples.size() << ','
        << fmt(r.audit.max_isotropy_residual) << ',' << fmt(r.audit.e_mean) << ',' << fmt(r.audit.e_spread) << ','
        << fmt(r.audit.max_grad_e) << ',' << (r.audit.asserted ? "true" : "false") << ','
        << to_string(r.audit.verdict) << ',' << (r.weak ? fmt(r.weak->c) : "") << ','
        << (r.weak ? fmt(r.weak->max_hessian_residual) : "") << ',' << (r.pass ? "true" : "false") << '\n';
    }
    res.output = s.str();
  } else {
    ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = "audit";
    doc["config"] = config_echo(cfg, &model);
    ordered_json audits = ordered_json::array();
    for (std::size_t b = 0; b < rows.size(); ++b) {
      const auto& r = rows[b];
      ordered_json a;
      a["tag"] = "thm-1";
      a["base"] = b;
      a["x"] = vector_json(r.audit.x);
      a["samples"] = r.audit.samples.size();
      a["max_isotropy_residual"] = r.audit.max_isotropy_residual;
      a["e_mean"] = r.audit.e_mean;
      a["e_spread"] = r.audit.e_spread;
      a["max_grad_e"] = r.audit.max_grad_e;
      a["asserted"] = r.audit.asserted;
      a["verdict"] = to_string(r.audit.verdict);
      if (r.weak) {
        a["weak_isotropy"] = {{"c", r.weak->c},
                              {"max_hessian_residual", r.weak->max_hessian_residual},
                              {"tolerance", tol},
                              {"pass", r.weak->max_hessian_residual <= tol}};
      } else {
        a["weak_isotropy"] = nullptr;
      }
      a["tolerance"] = tol;
      a["pass"] = r.pass;
      audits.push_back(a);
    }
    doc["audits"] = audits;
    doc["pass"] = all;
    res.output = render(doc);
  }
  if (violation) res.diagnostic = "VIOLATION: isotropic mean Berwald curvature with non-constant e\n";
  else if (!all) res.diagnostic = "weak isotropy residual exceeds tolerance\n";
  return res;
}

CommandResult cmd_zoo(const RunConfig& cfg) {
  CommandResult res;
  if (cfg.format == "csv") {
    std::ostringstream s;
    s << "id,formula,dims,params,condition,volumes\n";
    for (const auto& e : zoo_entries()) {
      std::string params;
      for (const auto& p : e.params) params += (params.empty() ? "" : " ") + p.name + "=" + p.default_value;
      s << e.id << ",\"" << e.formula << "\"," << e.dims << ",\"" << params << "\",\"" << e.condition << "\",\""
        << e.volume_hint << "\"\n";
    }
    res.output = s.str();
    return res;
  }
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = "zoo";
  ordered_json list = ordered_json::array();
  for (const auto& e : zoo_entries()) {
    ordered_json j;
    j["id"] = e.id;
    j["formula"] = e.formula;
    j["dims"] = e.dims;
    ordered_json ps = ordered_json::array();
    for (const auto& p : e.params) ps.push_back({{"name", p.name}, {"default", p.default_value}, {"description", p.description}});
    j["params"] = ps;
    j["condition"] = e.condition;
    j["volumes"] = e.volume_hint;
    list.push_back(j);
  }
  doc["metrics"] = list;
  res.output = render(doc);
  return res;
}

CommandResult run_command(const RunConfig& cfg) {
  try {
    validate(cfg);
    if (cfg.command == "check") return cmd_check(cfg);
    if (cfg.command == "curvature") return cmd_curvature(cfg);
    if (cfg.command == "audit") return cmd_audit(cfg);
    return cmd_zoo(cfg);
  } catch (const Error& e) {
    CommandResult res;
    res.exit_code = 2;
    res.diagnostic = std::string("error: ") + e.what() + "\n";
    return res;
  }
}

}  // namespace finsler
