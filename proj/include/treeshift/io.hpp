#pragma once

// Model files, JSON/CSV formatting and run manifests.

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "treeshift/rate_function.hpp"
#include "treeshift/tree_core.hpp"

namespace treeshift {

inline constexpr const char* kToolVersion = "1.0.0";

struct ModelFile {
  AdjacencyModel model;
  std::optional<RealMatrix> M;
  /// Observable weights, read from "A" or "W".
  std::optional<RealMatrix> W;
};

/// Parses {"symbols", "adjacency", "d", "M"?, "A"?}. Syntax errors raise
/// Error(Parse); shape and value errors raise Error(Validation) naming the row
/// and column.
ModelFile parse_model(const std::string& text, const Limits& limits = {});

/// Chain view of a model file; needs M and a weight matrix.
WeightedChainModel chain_model(const ModelFile& file);

std::uint64_t fnv1a64(const std::string& bytes);

/// Finite doubles as numbers, infinities as the strings "inf" / "-inf".
nlohmann::json number(double v);

/// Shortest round-tripping text for a double; "inf" / "-inf" for infinities.
std::string format_double(double v);

nlohmann::json matrix_json(const RealMatrix& m);

nlohmann::json tree_json(const LabeledTree& t, const AdjacencyModel& model);
LabeledTree tree_from_json(const nlohmann::json& j, const AdjacencyModel& model);

struct Manifest {
  std::string command;
  std::string input_hash;
  nlohmann::json config;
  std::optional<double> wall_time;

  nlohmann::json to_json() const;
  /// Single "# manifest: {...}" line for CSV artifacts.
  std::string csv_line() const;
};

}  // namespace treeshift
