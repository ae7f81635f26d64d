#include "finsler/metric.hpp"

#include <sstream>

namespace finsler {

std::string to_string(VolumeKind kind) {
  switch (kind) {
    case VolumeKind::lebesgue: return "lebesgue";
    case VolumeKind::busemann_hausdorff: return "busemann_hausdorff";
    case VolumeKind::riemannian_auto: return "riemannian_auto";
    case VolumeKind::custom: return "custom";
  }
  return "?";
}

namespace {

void require_bound(const Expr& e, const ParamMap& params, const char* what) {
  for (const auto& name : e.parameters()) {
    if (params.find(name) == params.end()) {
      throw InvalidInput(std::string(what) + " uses unbound parameter '" + name + "'");
    }
  }
}

std::string format_point(const std::vector<double>& v) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ')';
  return os.str();
}

}  // namespace

MetricModel finalize_model(MetricModel model) {
  if (model.dim < 2) throw InvalidInput("dim must be at least 2");
  if (model.dim > 4) throw InvalidInput("dim must be at most 4 (jet variable budget)");
  if (model.F.empty()) throw InvalidInput("metric expression is empty");
  if (model.F.dim() != model.dim) throw InvalidInput("metric expression dimension differs from dim");
  require_bound(model.F, model.params, "metric expression");
  for (const auto& a : model.coefficient_a) require_bound(a, model.params, "coefficient a_ij");
  for (const auto& b : model.one_form_b) require_bound(b, model.params, "coefficient b_i");

  switch (model.volume.kind) {
    case VolumeKind::custom:
      if (model.volume.sigma.empty()) throw InvalidInput("volume: custom sigma expression is empty");
      if (model.volume.sigma.depends_on_y()) throw InvalidInput("volume: sigma(x) must not reference y");
      require_bound(model.volume.sigma, model.params, "volume expression");
      break;
    case VolumeKind::riemannian_auto:
      if (!model.riemannian || model.coefficient_a.empty()) {
        throw InvalidInput("volume: auto (sqrt det a) is only available for euclidean and riemannian metrics");
      }
      break;
    default:
      break;
  }

  constexpr std::uint64_t kHomogeneitySeed = 0x243f6a8885a308d3ULL;
  HomogeneityReport report;
  try {
    report = check_positive_homogeneity(model.F, model.dim, 64, kHomogeneitySeed, model.params,
                                        0.9 * model.base_radius);
  } catch (const DomainError& e) {
    throw InvalidInput(std::string("metric expression cannot be evaluated on the sampled cone: ") + e.what());
  }
  if (!(report.max_relative_deviation <= 1e-8)) {
    throw InvalidInput("metric expression is not positively 1-homogeneous in y: relative deviation " +
                       std::to_string(report.max_relative_deviation) + " at x = " +
                       format_point(report.worst_x) + ", y = " + format_point(report.worst_y));
  }
  if (!(report.min_value > 0.0)) {
    throw InvalidInput("metric expression is not positive: F = " + std::to_string(report.min_value) +
                       " on the sampled cone");
  }
  return model;
}

void validate_flag_point(const MetricModel& model, const FlagPoint& p) {
  if (p.x.size() != model.dim) throw InvalidInput("x must have " + std::to_string(model.dim) + " components");
  if (p.y.size() != model.dim) throw InvalidInput("y must have " + std::to_string(model.dim) + " components");
  if (p.y.squaredNorm() == 0.0) throw InvalidInput("y must be nonzero");
  model.check_base(p.x);
  const double f = model.eval_F(p.x, p.y);
  if (!(f > 0.0)) throw InvalidInput("F(x, y) must be positive, got " + std::to_string(f));
}

}  // namespace finsler
