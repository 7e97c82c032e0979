#include "treeshift/io.hpp"

#include <charconv>
#include <sstream>

namespace treeshift {

using nlohmann::json;

namespace {

std::string where(const char* name, std::size_t row, std::size_t col) {
  std::ostringstream os;
  os << name << "[" << row << "][" << col << "]";
  return os.str();
}

template <class T, class Convert>
Matrix<T> read_matrix(const json& j, const char* name, std::size_t n, Convert convert) {
  if (!j.is_array()) fail(ErrorCode::Validation, std::string(name) + " must be an array of rows");
  if (j.size() != n) {
    std::ostringstream os;
    os << name << " has " << j.size() << " rows, expected " << n;
    fail(ErrorCode::Validation, os.str());
  }
  Matrix<T> m(n);
  for (std::size_t a = 0; a < n; ++a) {
    const auto& row = j[a];
    if (!row.is_array() || row.size() != n) {
      std::ostringstream os;
      os << name << " row " << a << " must have " << n << " entries";
      fail(ErrorCode::Validation, os.str());
    }
    for (std::size_t b = 0; b < n; ++b) {
      if (!row[b].is_number()) fail(ErrorCode::Validation, where(name, a, b) + " is not a number");
      m(a, b) = convert(row[b].get<double>(), a, b);
    }
  }
  return m;
}

RealMatrix read_real(const json& j, const char* name, std::size_t n) {
  return read_matrix<double>(j, name, n, [&](double v, std::size_t a, std::size_t b) {
    if (!std::isfinite(v) || v < 0.0) fail(ErrorCode::Validation, where(name, a, b) + " must be finite and nonnegative");
    return v;
  });
}

}  // namespace

ModelFile parse_model(const std::string& text, const Limits& limits) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, std::string("model JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::Parse, "model JSON must be an object");
  if (!j.contains("adjacency")) fail(ErrorCode::Validation, "model is missing \"adjacency\"");
  const std::size_t n = j["adjacency"].is_array() ? j["adjacency"].size() : 0;

  ModelFile out;
  if (j.contains("symbols")) {
    if (!j["symbols"].is_array()) fail(ErrorCode::Validation, "\"symbols\" must be an array");
    for (const auto& s : j["symbols"]) {
      if (s.is_string())
        out.model.symbols.push_back(s.get<std::string>());
      else if (s.is_number_integer())
        out.model.symbols.push_back(std::to_string(s.get<long long>()));
      else
        fail(ErrorCode::Validation, "symbol names must be strings");
    }
  } else {
    for (std::size_t a = 0; a < n; ++a) out.model.symbols.push_back(std::to_string(a));
  }
  if (out.model.symbols.size() > limits.max_alphabet) {
    std::ostringstream os;
    os << "alphabet size " << out.model.symbols.size() << " exceeds limit " << limits.max_alphabet;
    fail(ErrorCode::Resource, os.str());
  }
  if (out.model.symbols.size() != n) {
    std::ostringstream os;
    os << "adjacency has " << n << " rows but there are " << out.model.symbols.size() << " symbols";
    fail(ErrorCode::Validation, os.str());
  }
  if (j.contains("d")) {
    if (!j["d"].is_number_integer()) fail(ErrorCode::Validation, "\"d\" must be an integer");
    out.model.arity = j["d"].get<int>();
  }
  out.model.adjacency = read_matrix<std::uint8_t>(j["adjacency"], "adjacency", n, [](double v, std::size_t a, std::size_t b) {
    if (v != 0.0 && v != 1.0) fail(ErrorCode::Validation, where("adjacency", a, b) + " must be 0 or 1");
    return static_cast<std::uint8_t>(v);
  });
  validate(out.model, limits);
  if (j.contains("M")) out.M = read_real(j["M"], "M", n);
  if (j.contains("A") && j.contains("W")) fail(ErrorCode::Validation, "give the weight matrix as \"A\" or \"W\", not both");
  if (j.contains("A")) out.W = read_real(j["A"], "A", n);
  if (j.contains("W")) out.W = read_real(j["W"], "W", n);
  return out;
}

WeightedChainModel chain_model(const ModelFile& file) {
  if (!file.M) fail(ErrorCode::Validation, "this command needs a transition matrix \"M\"");
  WeightedChainModel chain{file.model, *file.M, RealMatrix()};
  if (file.W) {
    chain.W = *file.W;
  } else {
    chain.W = to_real(file.model.adjacency);
  }
  validate(chain);
  return chain;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json matrix_json(const RealMatrix& m) {
  json rows = json::array();
  for (std::size_t a = 0; a < m.size(); ++a) {
    json row = json::array();
    for (std::size_t b = 0; b < m.size(); ++b) row.push_back(number(m(a, b)));
    rows.push_back(row);
  }
  return rows;
}

json tree_json(const LabeledTree& t, const AdjacencyModel& model) {
  json labels = json::array();
  for (auto l : t.labels) labels.push_back(model.symbols[l]);
  return {{"d", t.shape.arity}, {"depth", t.shape.depth}, {"labels", labels}};
}

LabeledTree tree_from_json(const json& j, const AdjacencyModel& model) {
  LabeledTree t;
  t.shape.arity = j.value("d", model.arity);
  t.shape.depth = j.at("depth").get<int>();
  for (const auto& l : j.at("labels")) {
    const auto name = l.get<std::string>();
    const auto it = std::find(model.symbols.begin(), model.symbols.end(), name);
    if (it == model.symbols.end()) fail(ErrorCode::Validation, "unknown symbol '" + name + "' in tree");
    t.labels.push_back(static_cast<std::uint32_t>(it - model.symbols.begin()));
  }
  if (t.labels.size() != t.shape.nodes()) fail(ErrorCode::Validation, "tree label count does not match its depth");
  return t;
}

json Manifest::to_json() const {
  json m = {{"command", command}, {"input_hash", input_hash}, {"config", config}, {"tool_version", kToolVersion}};
  if (wall_time) m["wall_time_s"] = *wall_time;
  return m;
}

std::string Manifest::csv_line() const { return "# manifest: " + to_json().dump() + "\n"; }

}  // namespace treeshift
