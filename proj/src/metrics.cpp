#include "gapforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <json.hpp>
#include <sstream>

#include "gapforge/error.hpp"

namespace gapforge {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    throw DomainError("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
  if (a == 0) throw DomainError("metric of empty vectors");
}

double safe_ratio(double num, double den, bool& flag) {
  if (den == 0.0) {
    flag = true;
    return 0.0;
  }
  return num / den;
}

}  // namespace

double mse(std::span<const double> predictions, std::span<const double> actuals) {
  check_lengths(predictions.size(), actuals.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - actuals[i];
    sum += d * d;
  }
  return sum / static_cast<double>(predictions.size());
}

double rmse(std::span<const double> predictions, std::span<const double> actuals) {
  return std::sqrt(mse(predictions, actuals));
}

RmsleResult rmsle_checked(std::span<const double> predictions, std::span<const double> actuals) {
  check_lengths(predictions.size(), actuals.size());
  RmsleResult r;
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (actuals[i] < 0.0) throw DomainError("rmsle: actual values must be >= 0");
    double p = predictions[i];
    if (p < 0.0) {
      p = 0.0;
      r.clipped = true;
    }
    const double d = std::log1p(p) - std::log1p(actuals[i]);
    sum += d * d;
  }
  r.value = std::sqrt(sum / static_cast<double>(predictions.size()));
  return r;
}

double rmsle(std::span<const double> predictions, std::span<const double> actuals) {
  return rmsle_checked(predictions, actuals).value;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts) {
    for (auto c : row) t += c;
  }
  return t;
}

std::uint64_t ConfusionMatrix::support(std::size_t i) const {
  std::uint64_t s = 0;
  for (auto c : counts[i]) s += c;
  return s;
}

std::uint64_t ConfusionMatrix::predicted(std::size_t j) const {
  std::uint64_t s = 0;
  for (const auto& row : counts) s += row[j];
  return s;
}

ConfusionMatrix confusion_matrix(std::span<const std::int64_t> truth,
                                 std::span<const std::int64_t> predicted) {
  check_lengths(truth.size(), predicted.size());
  std::map<std::int64_t, std::size_t> index;
  for (auto v : truth) index.emplace(v, 0);
  for (auto v : predicted) index.emplace(v, 0);
  ConfusionMatrix cm;
  for (auto& [label, i] : index) {
    i = cm.labels.size();
    cm.labels.push_back(label);
  }
  cm.counts.assign(cm.labels.size(), std::vector<std::uint64_t>(cm.labels.size(), 0));
  for (std::size_t k = 0; k < truth.size(); ++k) {
    ++cm.counts[index[truth[k]]][index[predicted[k]]];
  }
  return cm;
}

ConfusionMatrix confusion_matrix(std::span<const double> truth, std::span<const double> predicted) {
  std::vector<std::int64_t> t(truth.size());
  std::vector<std::int64_t> p(predicted.size());
  std::transform(truth.begin(), truth.end(), t.begin(),
                 [](double v) { return static_cast<std::int64_t>(std::llround(v)); });
  std::transform(predicted.begin(), predicted.end(), p.begin(),
                 [](double v) { return static_cast<std::int64_t>(std::llround(v)); });
  return confusion_matrix(std::span<const std::int64_t>(t), std::span<const std::int64_t>(p));
}

AverageMetrics macro_average(std::span<const ClassMetrics> classes) {
  AverageMetrics a;
  if (classes.empty()) return a;
  for (const auto& c : classes) {
    a.precision += c.precision;
    a.recall += c.recall;
    a.f1 += c.f1;
  }
  const auto n = static_cast<double>(classes.size());
  a.precision /= n;
  a.recall /= n;
  a.f1 /= n;
  return a;
}

AverageMetrics weighted_average(std::span<const ClassMetrics> classes) {
  AverageMetrics a;
  double total = 0.0;
  for (const auto& c : classes) {
    const auto w = static_cast<double>(c.support);
    a.precision += w * c.precision;
    a.recall += w * c.recall;
    a.f1 += w * c.f1;
    total += w;
  }
  if (total == 0.0) return {};
  a.precision /= total;
  a.recall /= total;
  a.f1 /= total;
  return a;
}

ClassificationReport classification_report(const ConfusionMatrix& cm) {
  ClassificationReport rep;
  rep.total_support = cm.total();
  if (rep.total_support == 0) throw DomainError("classification report needs at least one sample");
  std::uint64_t trace = 0;
  for (std::size_t i = 0; i < cm.labels.size(); ++i) {
    const auto tp = static_cast<double>(cm.counts[i][i]);
    trace += cm.counts[i][i];
    ClassMetrics m;
    m.label = std::to_string(cm.labels[i]);
    m.support = cm.support(i);
    m.precision = safe_ratio(tp, static_cast<double>(cm.predicted(i)), rep.zero_division);
    m.recall = safe_ratio(tp, static_cast<double>(m.support), rep.zero_division);
    m.f1 = safe_ratio(2.0 * m.precision * m.recall, m.precision + m.recall, rep.zero_division);
    rep.classes.push_back(std::move(m));
  }
  rep.accuracy = static_cast<double>(trace) / static_cast<double>(rep.total_support);
  rep.macro = macro_average(rep.classes);
  rep.weighted = weighted_average(rep.classes);
  return rep;
}

double round_half_up(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double scaled = std::abs(value) * scale;
  const double rounded = std::floor(scaled + 0.5 + 1e-9 * std::max(1.0, scaled)) / scale;
  return std::copysign(rounded, value);
}

namespace {

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", round_half_up(v, 2));
  return buf;
}

}  // namespace

std::string render_text(const ClassificationReport& report) {
  std::size_t width = std::string("weighted avg").size();
  for (const auto& c : report.classes) width = std::max(width, c.label.size());
  const std::string total = std::to_string(report.total_support);
  const std::size_t num_w = std::max<std::size_t>(9, total.size() + 1);

  std::ostringstream out;
  auto pad_left = [](const std::string& s, std::size_t w) {
    return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
  };
  out << std::string(width, ' ') << pad_left("precision", 10) << pad_left("recall", 10)
      << pad_left("f1-score", 10) << pad_left("support", num_w + 1) << "\n\n";
  for (const auto& c : report.classes) {
    out << pad_left(c.label, width) << pad_left(fixed2(c.precision), 10)
        << pad_left(fixed2(c.recall), 10) << pad_left(fixed2(c.f1), 10)
        << pad_left(std::to_string(c.support), num_w + 1) << '\n';
  }
  out << '\n';
  out << pad_left("accuracy", width) << std::string(20, ' ') << pad_left(fixed2(report.accuracy), 10)
      << pad_left(total, num_w + 1) << '\n';
  const auto avg_row = [&](const std::string& name, const AverageMetrics& a) {
    out << pad_left(name, width) << pad_left(fixed2(a.precision), 10)
        << pad_left(fixed2(a.recall), 10) << pad_left(fixed2(a.f1), 10)
        << pad_left(total, num_w + 1) << '\n';
  };
  avg_row("macro avg", report.macro);
  avg_row("weighted avg", report.weighted);
  return out.str();
}

std::string render_json(const ClassificationReport& report) {
  nlohmann::ordered_json j;
  auto& classes = j["classes"] = nlohmann::ordered_json::array();
  for (const auto& c : report.classes) {
    classes.push_back({{"label", c.label},
                       {"precision", c.precision},
                       {"recall", c.recall},
                       {"f1", c.f1},
                       {"support", c.support}});
  }
  j["accuracy"] = report.accuracy;
  j["macro_avg"] = {{"precision", report.macro.precision},
                    {"recall", report.macro.recall},
                    {"f1", report.macro.f1}};
  j["weighted_avg"] = {{"precision", report.weighted.precision},
                       {"recall", report.weighted.recall},
                       {"f1", report.weighted.f1}};
  j["total_support"] = report.total_support;
  j["zero_division"] = report.zero_division;
  return j.dump(2);
}

double accuracy(std::span<const double> truth, std::span<const double> predicted) {
  return classification_report(confusion_matrix(truth, predicted)).accuracy;
}

double f1_macro(std::span<const double> truth, std::span<const double> predicted) {
  return classification_report(confusion_matrix(truth, predicted)).macro.f1;
}

}  // namespace gapforge
