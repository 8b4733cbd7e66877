#include "confls/confidence.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "confls/errors.hpp"
#include "confls/text_io.hpp"

namespace confls {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(ConfidenceKind kind) {
  return kind == ConfidenceKind::model ? "model" : "human";
}

ConfidenceKind parse_confidence_kind(std::string_view text) {
  if (text == "model") return ConfidenceKind::model;
  if (text == "human") return ConfidenceKind::human;
  throw std::invalid_argument("confidence kind must be 'model' or 'human', got '" + std::string(text) + "'");
}

ConfidenceTable::ConfidenceTable(ConfidenceKind kind, std::size_t num_classes)
    : kind_(kind), num_classes_(num_classes) {
  if (num_classes_ == 0) throw DataError("confidence table needs at least one class");
}

void ConfidenceTable::insert(std::string id, ConfidenceEntry entry) {
  if (entry.vector.size() != num_classes_) {
    throw DataError("confidence entry '" + id + "' has " + std::to_string(entry.vector.size()) +
                    " classes, table has " + std::to_string(num_classes_));
  }
  const double n = static_cast<double>(num_classes_);
  // Small slack absorbs rounding in the sigma computation.
  const double upper = kind_ == ConfidenceKind::model ? 1.0 : std::sqrt(n - 1.0) / n + 1e-12;
  if (!(entry.scalar >= 0.0 && entry.scalar <= upper)) {
    throw DataError("confidence entry '" + id + "' has scalar " + format_double(entry.scalar) +
                    " outside [0, " + format_double(upper) + "]");
  }
  if (index_.contains(id)) throw DataError("duplicate confidence entry '" + id + "'");
  index_.emplace(id, entries_.size());
  entries_.emplace_back(std::move(id), std::move(entry));
}

const ConfidenceEntry& ConfidenceTable::at(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) {
    throw DataError("no " + std::string(to_string(kind_)) + " confidence entry for sample '" + id + "'");
  }
  return entries_[it->second].second;
}

double human_confidence_scalar(const ProbVector& dist) {
  const double n = static_cast<double>(dist.size());
  double mean = 0.0;
  for (double v : dist) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : dist) var += (v - mean) * (v - mean);
  return std::sqrt(var / n);
}

ProbVector human_confidence_vector(const AnnotatedSample& sample) {
  return annotation_distribution(sample);
}

ConfidenceTable human_confidence_table(const Dataset& dataset) {
  ConfidenceTable table(ConfidenceKind::human, dataset.num_classes());
  for (const auto& s : dataset.samples()) {
    ProbVector h = human_confidence_vector(s);
    const double sigma = human_confidence_scalar(h);
    table.insert(s.id, {std::move(h), sigma});
  }
  return table;
}

ConfidenceTable precompute_model_confidence(const ModelParams& model, const Dataset& dataset) {
  const auto predictions = predict_all(model, dataset);
  ConfidenceTable table(ConfidenceKind::model, dataset.num_classes());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const double mc = predictions[i].probs[modal_label(dataset[i])];
    table.insert(dataset[i].id, {predictions[i].probs, mc});
  }
  return table;
}

std::vector<const ConfidenceEntry*> join(const ConfidenceTable& table, const Dataset& dataset) {
  if (table.num_classes() != dataset.num_classes()) {
    throw DataError(std::string(to_string(table.kind())) + " confidence table has " +
                    std::to_string(table.num_classes()) + " classes, dataset has " +
                    std::to_string(dataset.num_classes()));
  }
  std::vector<const ConfidenceEntry*> out;
  out.reserve(dataset.size());
  for (const auto& s : dataset.samples()) out.push_back(&table.at(s.id));
  return out;
}

std::string serialize_table(const ConfidenceTable& table) {
  ordered_json header;
  header["kind"] = std::string(to_string(table.kind()));
  header["num_classes"] = table.num_classes();
  std::string out = header.dump();
  out += '\n';
  for (const auto& [id, entry] : table.entries()) {
    ordered_json record;
    record["id"] = id;
    record["vector"] = std::vector<double>(entry.vector.begin(), entry.vector.end());
    record["scalar"] = entry.scalar;
    out += record.dump();
    out += '\n';
  }
  return out;
}

ConfidenceTable parse_table(std::string_view text, const std::string& source) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0].empty()) throw DataError(source + ": empty confidence file");
  auto at_line = [&](std::size_t index, const std::string& what) {
    return DataError(source + ":" + std::to_string(index + 1) + ": " + what);
  };

  ConfidenceKind kind{};
  std::size_t num_classes = 0;
  try {
    const auto header = ordered_json::parse(lines[0]);
    kind = parse_confidence_kind(header.at("kind").get<std::string>());
    num_classes = header.at("num_classes").get<std::size_t>();
  } catch (const std::exception& e) {
    throw at_line(0, std::string("bad header: ") + e.what());
  }
  if (num_classes == 0) throw at_line(0, "num_classes must be positive");

  ConfidenceTable table(kind, num_classes);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      const auto record = ordered_json::parse(lines[i]);
      ProbVector vector(record.at("vector").get<std::vector<double>>());
      table.insert(record.at("id").get<std::string>(), {std::move(vector), record.at("scalar").get<double>()});
    } catch (const std::exception& e) {
      throw at_line(i, e.what());
    }
  }
  return table;
}

void save_table(const ConfidenceTable& table, const std::filesystem::path& path) {
  write_file(path, serialize_table(table));
}

ConfidenceTable load_table(const std::filesystem::path& path) {
  return parse_table(read_file(path), path.string());
}

}  // namespace confls
