#include "gapforge/synthetic.hpp"

#include <cmath>

#include "gapforge/error.hpp"
#include "gapforge/random.hpp"

namespace gapforge {

namespace {

constexpr double kSeparationDecay = 0.7;

struct Features {
  std::vector<std::vector<double>> numeric;  // [feature][row], centered (no offset)
  std::vector<std::vector<std::size_t>> levels;  // [feature][row]
};

Features draw_features(const SyntheticSpec& spec, Rng& rng) {
  const std::size_t n = spec.n_rows;
  const auto p = static_cast<std::size_t>(spec.n_numeric_features);
  const double shared = std::sqrt(spec.feature_correlation);
  const double own = std::sqrt(1.0 - spec.feature_correlation);
  Features f;
  f.numeric.assign(p, std::vector<double>(n));
  f.levels.assign(spec.categorical_levels.size(), std::vector<std::size_t>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const double factor = rng.normal();
    for (std::size_t j = 0; j < p; ++j) f.numeric[j][r] = shared * factor + own * rng.normal();
    for (std::size_t k = 0; k < f.levels.size(); ++k) {
      f.levels[k][r] = rng.below(static_cast<std::size_t>(spec.categorical_levels[k]));
    }
  }
  return f;
}

std::vector<Column> feature_columns(const SyntheticSpec& spec, const Features& f) {
  std::vector<Column> cols;
  for (std::size_t j = 0; j < f.numeric.size(); ++j) {
    std::vector<double> v = f.numeric[j];
    for (double& x : v) x += spec.feature_offset;
    cols.push_back(Column::numeric("x" + std::to_string(j), std::move(v)));
  }
  for (std::size_t k = 0; k < f.levels.size(); ++k) {
    std::vector<std::string> vocab;
    for (int l = 0; l < spec.categorical_levels[k]; ++l) vocab.push_back("L" + std::to_string(l));
    std::vector<double> codes(f.levels[k].begin(), f.levels[k].end());
    cols.push_back(Column::categorical("c" + std::to_string(k), std::move(vocab), std::move(codes)));
  }
  return cols;
}

}  // namespace

void validate(const SyntheticSpec& spec) {
  if (spec.n_rows < 10) throw SpecError("n_rows", "must be >= 10");
  if (spec.n_numeric_features < 0) throw SpecError("n_numeric_features", "must be >= 0");
  for (int levels : spec.categorical_levels) {
    if (levels < 1) throw SpecError("categorical_levels", "every feature needs at least 1 level");
  }
  if (spec.n_numeric_features == 0 && spec.categorical_levels.empty()) {
    throw SpecError("n_numeric_features", "the table needs at least one feature");
  }
  if (!(spec.noise_stddev >= 0.0) || !std::isfinite(spec.noise_stddev)) {
    throw SpecError("noise_stddev", "must be finite and >= 0");
  }
  if (!std::isfinite(spec.feature_offset)) throw SpecError("feature_offset", "must be finite");
  if (!(spec.feature_correlation >= 0.0 && spec.feature_correlation < 1.0)) {
    throw SpecError("feature_correlation", "must be in [0, 1)");
  }
  if (!std::isfinite(spec.nonlinearity)) throw SpecError("nonlinearity", "must be finite");
  if (spec.task == Task::Classification) {
    if (spec.class_count < 2) throw SpecError("class_count", "must be >= 2");
    if (!(spec.separation >= 0.0) || !std::isfinite(spec.separation)) {
      throw SpecError("separation", "must be finite and >= 0");
    }
    if (spec.n_numeric_features == 0) {
      throw SpecError("n_numeric_features", "classification needs numeric features");
    }
  }
  if (spec.target_name.empty()) throw SpecError("target_name", "must not be empty");
}

SyntheticCoefficients synth_coefficients(const SyntheticSpec& spec) {
  validate(spec);
  Rng rng(spec.coefficient_seed);
  SyntheticCoefficients c;
  for (int j = 0; j < spec.n_numeric_features; ++j) {
    const double magnitude = 0.5 + 1.5 * rng.uniform();
    const double beta = rng.bernoulli(0.5) ? magnitude : -magnitude;
    c.numeric.push_back(beta);
    c.intercept -= beta * spec.feature_offset;
  }
  for (int levels : spec.categorical_levels) {
    std::vector<double> effects(static_cast<std::size_t>(levels));
    for (double& e : effects) e = rng.normal();
    c.categorical.push_back(std::move(effects));
  }
  return c;
}

Table synth_regression(const SyntheticSpec& spec) {
  validate(spec);
  if (spec.task != Task::Regression) throw SpecError("task", "synth_regression needs task = regression");
  const SyntheticCoefficients coef = synth_coefficients(spec);
  Rng rng(spec.seed);
  const Features f = draw_features(spec, rng);

  std::vector<double> y(spec.n_rows);
  for (std::size_t r = 0; r < spec.n_rows; ++r) {
    double v = 0.0;
    for (std::size_t j = 0; j < f.numeric.size(); ++j) v += coef.numeric[j] * f.numeric[j][r];
    for (std::size_t j = 0; j + 1 < f.numeric.size(); ++j) {
      v += spec.nonlinearity * f.numeric[j][r] * f.numeric[j + 1][r];
    }
    for (std::size_t k = 0; k < f.levels.size(); ++k) v += coef.categorical[k][f.levels[k][r]];
    y[r] = v + spec.noise_stddev * rng.normal();
  }

  std::vector<Column> cols = feature_columns(spec, f);
  cols.push_back(Column::numeric(spec.target_name, std::move(y)));
  return Table(std::move(cols));
}

Table synth_classification(const SyntheticSpec& spec) {
  validate(spec);
  if (spec.task != Task::Classification) {
    throw SpecError("task", "synth_classification needs task = classification");
  }
  Rng rng(spec.seed);
  const auto n_classes = static_cast<std::size_t>(spec.class_count);
  std::vector<std::size_t> cls(spec.n_rows);
  for (auto& c : cls) c = rng.below(n_classes);
  Features f = draw_features(spec, rng);

  const double center = (static_cast<double>(n_classes) - 1.0) / 2.0;
  for (std::size_t j = 0; j < f.numeric.size(); ++j) {
    const double step = spec.separation * std::pow(kSeparationDecay, static_cast<double>(j));
    for (std::size_t r = 0; r < spec.n_rows; ++r) {
      f.numeric[j][r] += (static_cast<double>(cls[r]) - center) * step;
    }
  }

  std::vector<Column> cols = feature_columns(spec, f);
  std::vector<std::string> vocab;
  for (std::size_t c = 0; c < n_classes; ++c) vocab.push_back(std::to_string(c));
  cols.push_back(Column::categorical(spec.target_name, std::move(vocab),
                                     std::vector<double>(cls.begin(), cls.end())));
  return Table(std::move(cols));
}

Table synthesize(const SyntheticSpec& spec) {
  return spec.task == Task::Regression ? synth_regression(spec) : synth_classification(spec);
}

}  // namespace gapforge
