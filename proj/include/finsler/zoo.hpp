#pragma once

// Built-in metric families. Each entry is produced as expression text and
// parsed, so a zoo metric and the same formula typed by hand are the same
// object.

#include <map>
#include <string>
#include <vector>

#include "finsler/metric.hpp"

namespace finsler {

/// Parameter values as expression text. Coefficient parameters (a_ij, b_i)
/// may reference x; scalar parameters must be constants.
using TextParams = std::map<std::string, std::string>;

struct ZooParam {
  std::string name;
  std::string default_value;
  std::string description;
};

struct ZooEntry {
  std::string id;
  std::string formula;
  std::string dims;
  std::vector<ZooParam> params;
  std::string condition;
  std::string volume_hint;
};

const std::vector<ZooEntry>& zoo_entries();

/// Resolves the aliases "funk" and "quartic".
std::string canonical_zoo_id(const std::string& id);

MetricModel build_metric(const std::string& id, int dim, const TextParams& params = {}, VolumeForm volume = {});

/// User metric from expression text. Parameter values must be constants.
MetricModel metric_from_expression(const std::string& text, int dim, const TextParams& params = {},
                                   VolumeForm volume = {});

/// Randers condition norm |b(x)|_a for a model built as "randers".
double randers_norm(const MetricModel& model, const Eigen::VectorXd& x);

}  // namespace finsler
