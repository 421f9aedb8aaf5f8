#include <algorithm>
#include <unordered_map>

#include "gapforge/error.hpp"
#include "gapforge/learners.hpp"

namespace gapforge {

std::size_t FeatureSchema::width() const {
  std::size_t w = 0;
  for (const auto& s : sources) w += s.kind == ColumnKind::Numeric ? 1 : s.vocabulary.size();
  return w;
}

std::vector<std::string> FeatureSchema::feature_names() const {
  std::vector<std::string> names;
  names.reserve(width());
  for (const auto& s : sources) {
    if (s.kind == ColumnKind::Numeric) {
      names.push_back(s.column);
    } else {
      for (const auto& label : s.vocabulary) names.push_back(s.column + "=" + label);
    }
  }
  return names;
}

FeatureSchema feature_schema(const Table& table, std::span<const std::string> exclude) {
  FeatureSchema schema;
  for (const auto& c : table.columns()) {
    if (std::find(exclude.begin(), exclude.end(), c.name()) != exclude.end()) continue;
    schema.sources.push_back({c.name(), c.kind(), c.is_categorical() ? c.vocabulary()
                                                                     : std::vector<std::string>{}});
  }
  return schema;
}

Matrix encode_features(const Table& table, const FeatureSchema& schema) {
  const std::size_t n = table.n_rows();
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(schema.width()));
  Eigen::Index offset = 0;
  for (const auto& src : schema.sources) {
    const Column& col = table.column(src.column);
    if (col.kind() != src.kind) {
      throw EncodeError("column '" + src.column + "' is " + std::string(to_string(col.kind())) +
                        ", schema expects " + std::string(to_string(src.kind)));
    }
    if (col.missing_count() != 0) {
      throw EncodeError("column '" + src.column + "' has " + std::to_string(col.missing_count()) +
                        " missing cells; impute before encoding");
    }
    if (src.kind == ColumnKind::Numeric) {
      for (std::size_t r = 0; r < n; ++r) x(static_cast<Eigen::Index>(r), offset) = col.value(r);
      offset += 1;
      continue;
    }
    // Map this table's codes onto the schema's vocabulary by label.
    std::unordered_map<std::string, Eigen::Index> slot;
    for (std::size_t i = 0; i < src.vocabulary.size(); ++i) {
      slot.emplace(src.vocabulary[i], static_cast<Eigen::Index>(i));
    }
    std::vector<Eigen::Index> remap(col.vocabulary().size(), -1);
    for (std::size_t i = 0; i < col.vocabulary().size(); ++i) {
      if (auto it = slot.find(col.vocabulary()[i]); it != slot.end()) remap[i] = it->second;
    }
    for (std::size_t r = 0; r < n; ++r) {
      const Eigen::Index j = remap[col.code(r)];
      if (j >= 0) x(static_cast<Eigen::Index>(r), offset + j) = 1.0;
    }
    offset += static_cast<Eigen::Index>(src.vocabulary.size());
  }
  return x;
}

namespace {

DesignMatrix encode_with(const Table& table, const std::string& target_column,
                         FeatureSchema schema, std::vector<std::string> classes,
                         bool extend_classes) {
  const Column& target = table.column(target_column);
  if (target.missing_count() != 0) {
    throw EncodeError("target column '" + target_column + "' has missing cells");
  }
  DesignMatrix dm;
  dm.features = encode_features(table, schema);
  dm.feature_names = schema.feature_names();
  dm.schema = std::move(schema);
  dm.target.resize(table.n_rows());
  if (target.is_numeric()) {
    dm.task = Task::Regression;
    for (std::size_t r = 0; r < table.n_rows(); ++r) dm.target[r] = target.value(r);
    return dm;
  }
  dm.task = Task::Classification;
  std::unordered_map<std::string, std::size_t> code_of;
  for (std::size_t i = 0; i < classes.size(); ++i) code_of.emplace(classes[i], i);
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    const std::string& label = target.label(r);
    auto it = code_of.find(label);
    if (it == code_of.end()) {
      if (!extend_classes) throw EncodeError("unknown target label '" + label + "'");
      it = code_of.emplace(label, classes.size()).first;
      classes.push_back(label);
    }
    dm.target[r] = static_cast<double>(it->second);
  }
  dm.classes = std::move(classes);
  return dm;
}

}  // namespace

DesignMatrix encode(const Table& table, const std::string& target_column) {
  if (!table.has_column(target_column)) {
    throw NameError("no target column named '" + target_column + "'");
  }
  const std::vector<std::string> exclude{target_column};
  const Column& target = table.column(target_column);
  return encode_with(table, target_column, feature_schema(table, exclude),
                     target.is_categorical() ? target.vocabulary() : std::vector<std::string>{},
                     false);
}

DesignMatrix encode(const Table& table, const std::string& target_column,
                    const FeatureSchema& schema, const std::vector<std::string>& classes) {
  if (!table.has_column(target_column)) {
    throw NameError("no target column named '" + target_column + "'");
  }
  return encode_with(table, target_column, schema, classes, true);
}

}  // namespace gapforge
