#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gapforge/error.hpp"
#include "gapforge/metrics.hpp"
#include "gapforge/random.hpp"

using namespace gapforge;

namespace {

// Independent counting over the raw pairs, no confusion matrix involved.
struct OracleClass {
  double precision, recall, f1;
  std::uint64_t support;
};

std::vector<OracleClass> oracle(const std::vector<std::int64_t>& t, const std::vector<std::int64_t>& p,
                                const std::vector<std::int64_t>& labels) {
  std::vector<OracleClass> out;
  for (auto c : labels) {
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] == c && p[i] == c) ++tp;
      if (t[i] != c && p[i] == c) ++fp;
      if (t[i] == c && p[i] != c) ++fn;
    }
    const double prec = tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp);
    const double rec = tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn);
    const double f1 = prec + rec == 0.0 ? 0.0 : 2 * prec * rec / (prec + rec);
    out.push_back({prec, rec, f1, tp + fn});
  }
  return out;
}

ClassMetrics with(double precision, std::uint64_t support) {
  ClassMetrics m;
  m.precision = precision;
  m.support = support;
  return m;
}

}  // namespace

TEST_CASE("mse and rmse") {
  const std::vector<double> a{1, 2, 3};
  CHECK(mse(a, a) == 0.0);
  CHECK(mse(std::vector<double>{0, 0}, std::vector<double>{1, 1}) == 1.0);
  CHECK(rmse(std::vector<double>{0, 0}, std::vector<double>{2, 2}) == 2.0);

  Rng rng(5);
  std::vector<double> p(100), q(100);
  for (std::size_t i = 0; i < 100; ++i) {
    p[i] = rng.normal() * 3;
    q[i] = rng.normal();
  }
  long double sum = 0;
  for (std::size_t i = 0; i < 100; ++i) sum += (long double)(p[i] - q[i]) * (p[i] - q[i]);
  CHECK(mse(p, q) == doctest::Approx(double(sum / 100)).epsilon(1e-12));
  CHECK(mse(p, q) == mse(q, p));

  CHECK_THROWS_AS(mse(std::vector<double>{}, std::vector<double>{}), DomainError);
  CHECK_THROWS_AS(mse(std::vector<double>{1}, std::vector<double>{1, 2}), DomainError);
}

TEST_CASE("rmsle") {
  CHECK(rmsle(std::vector<double>{std::numbers::e - 1}, std::vector<double>{0}) ==
        doctest::Approx(1.0));
  const std::vector<double> a{0, 1, 5};
  CHECK(rmsle(a, a) == 0.0);

  Rng rng(9);
  std::vector<double> p(50), q(50), lp(50), lq(50);
  double sum = 0;
  for (std::size_t i = 0; i < 50; ++i) {
    p[i] = rng.uniform() * 100;
    q[i] = rng.uniform() * 100;
    lp[i] = std::log(1 + p[i]);
    lq[i] = std::log(1 + q[i]);
    sum += (lp[i] - lq[i]) * (lp[i] - lq[i]);
  }
  CHECK(rmsle(p, q) == doctest::Approx(std::sqrt(sum / 50)).epsilon(1e-12));
  CHECK(rmsle(p, q) == doctest::Approx(rmse(lp, lq)).epsilon(1e-12));

  const auto clipped = rmsle_checked(std::vector<double>{-3}, std::vector<double>{0});
  CHECK(clipped.clipped);
  CHECK(clipped.value == 0.0);
  CHECK_FALSE(rmsle_checked(a, a).clipped);
  CHECK_THROWS_AS(rmsle(std::vector<double>{1}, std::vector<double>{-1}), DomainError);
}

TEST_CASE("confusion matrix") {
  const std::vector<std::int64_t> t{0, 0, 1}, p{0, 1, 1};
  const auto cm = confusion_matrix(std::span<const std::int64_t>(t), std::span<const std::int64_t>(p));
  CHECK(cm.labels == std::vector<std::int64_t>{0, 1});
  CHECK(cm.counts[0][0] == 1);
  CHECK(cm.counts[0][1] == 1);
  CHECK(cm.counts[1][0] == 0);
  CHECK(cm.counts[1][1] == 1);

  const std::vector<std::int64_t> perfect{2, 0, 5, 5};
  const auto diag =
      confusion_matrix(std::span<const std::int64_t>(perfect), std::span<const std::int64_t>(perfect));
  CHECK(diag.labels == std::vector<std::int64_t>{0, 2, 5});
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (i != j) CHECK(diag.counts[i][j] == 0);
    }
  }
  CHECK(diag.counts[2][2] == 2);

  // A label only ever predicted still gets a row.
  const std::vector<std::int64_t> t2{0, 0}, p2{0, 3};
  const auto cm2 = confusion_matrix(std::span<const std::int64_t>(t2), std::span<const std::int64_t>(p2));
  CHECK(cm2.labels == std::vector<std::int64_t>{0, 3});
  CHECK(cm2.support(1) == 0);

  CHECK_THROWS_AS(confusion_matrix(std::span<const std::int64_t>(t), std::span<const std::int64_t>(p2)),
                  DomainError);
}

TEST_CASE("classification report matches a counting oracle on random pairs") {
  Rng rng(2024);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 1 + rng.below(30);
    const std::size_t k = 1 + rng.below(4);
    std::vector<std::int64_t> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<std::int64_t>(rng.below(k));
      p[i] = static_cast<std::int64_t>(rng.below(k));
    }
    const auto cm = confusion_matrix(std::span<const std::int64_t>(t), std::span<const std::int64_t>(p));
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < cm.labels.size(); ++i) {
      total += cm.support(i);
      std::uint64_t count = 0;
      for (auto v : t) count += v == cm.labels[i];
      REQUIRE(cm.support(i) == count);
      for (std::size_t j = 0; j < cm.labels.size(); ++j) {
        std::uint64_t joint = 0;
        for (std::size_t s = 0; s < n; ++s) joint += t[s] == cm.labels[i] && p[s] == cm.labels[j];
        REQUIRE(cm.counts[i][j] == joint);
      }
    }
    REQUIRE(total == n);

    const auto rep_ = classification_report(cm);
    const auto want = oracle(t, p, cm.labels);
    REQUIRE(rep_.classes.size() == want.size());
    std::uint64_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) correct += t[i] == p[i];
    CHECK(rep_.accuracy == double(correct) / double(n));
    CHECK(rep_.accuracy == doctest::Approx(rep_.weighted.recall));
    for (std::size_t c = 0; c < want.size(); ++c) {
      CHECK(rep_.classes[c].precision == want[c].precision);
      CHECK(rep_.classes[c].recall == want[c].recall);
      CHECK(rep_.classes[c].f1 == want[c].f1);
      CHECK(rep_.classes[c].support == want[c].support);
      CHECK(rep_.classes[c].f1 <= 2 * std::min(want[c].precision, want[c].recall) + 1e-15);
      CHECK(rep_.classes[c].f1 <= std::max(want[c].precision, want[c].recall) + 1e-15);
    }

    // permuting the pairs changes nothing
    auto perm = rng.permutation(n);
    std::vector<std::int64_t> tp(n), pp(n);
    for (std::size_t i = 0; i < n; ++i) {
      tp[i] = t[perm[i]];
      pp[i] = p[perm[i]];
    }
    const auto shuffled = classification_report(
        confusion_matrix(std::span<const std::int64_t>(tp), std::span<const std::int64_t>(pp)));
    CHECK(shuffled.macro.f1 == rep_.macro.f1);
    CHECK(shuffled.weighted.precision == rep_.weighted.precision);
  }
}

TEST_CASE("single class perfect predictions") {
  const std::vector<double> t{1, 1, 1};
  const auto r = classification_report(confusion_matrix(t, t));
  CHECK(r.accuracy == 1.0);
  CHECK(r.classes[0].precision == 1.0);
  CHECK(r.classes[0].recall == 1.0);
  CHECK(r.macro.f1 == 1.0);
  CHECK(r.weighted.f1 == 1.0);
  CHECK_FALSE(r.zero_division);
}

TEST_CASE("zero denominators are flagged") {
  const std::vector<double> t{0, 0, 1}, p{0, 0, 0};
  const auto r = classification_report(confusion_matrix(t, p));
  CHECK(r.zero_division);
  CHECK(r.classes[1].precision == 0.0);
  CHECK(r.classes[1].f1 == 0.0);
}

TEST_CASE("two-class aggregation with very unequal supports") {
  const std::vector<ClassMetrics> classes{with(0.94, 1'001'172), with(0.89, 76'999)};
  CHECK(round_half_up(weighted_average(classes).precision, 2) == 0.94);
  CHECK(round_half_up(macro_average(classes).precision, 2) == 0.92);
}

TEST_CASE("large imbalanced confusion matrix report") {
  ConfusionMatrix cm;
  cm.labels = {0, 1};
  cm.counts = {{999'122, 2'050}, {60'742, 16'257}};
  const auto r = classification_report(cm);
  auto r2 = [](double v) { return round_half_up(v, 2); };
  CHECK(r2(r.classes[0].precision) == 0.94);
  CHECK(r2(r.classes[0].recall) == 1.00);
  CHECK(r2(r.classes[0].f1) == 0.97);
  CHECK(r2(r.classes[1].precision) == 0.89);
  CHECK(r2(r.classes[1].recall) == 0.21);
  CHECK(r2(r.classes[1].f1) == 0.34);
  CHECK(r2(r.accuracy) == 0.94);
  CHECK(r2(r.macro.precision) == 0.92);
  CHECK(r2(r.macro.recall) == 0.60);
  CHECK(r2(r.macro.f1) == 0.66);
  CHECK(r2(r.weighted.precision) == 0.94);
  CHECK(r2(r.weighted.recall) == 0.94);
  CHECK(r2(r.weighted.f1) == 0.92);
  CHECK(r.classes[0].support == 1'001'172);
  CHECK(r.total_support == 1'078'171);

  const std::string text = render_text(r);
  CHECK(text.find("precision    recall  f1-score") != std::string::npos);
  CHECK(text.find("macro avg") != std::string::npos);
  CHECK(text.find("weighted avg") != std::string::npos);
  CHECK(text.find("1078171") != std::string::npos);
  // accuracy sits under the f1-score column
  const auto header_end = text.find('\n');
  const auto f1_col = text.find("f1-score") + std::string("f1-score").size();
  const auto acc_line = text.find("accuracy");
  const auto acc_value = text.find("0.94", acc_line);
  const auto line_start = text.rfind('\n', acc_line) + 1;
  CHECK(acc_value + 4 - line_start == f1_col);
  CHECK(header_end != std::string::npos);

  const std::string json = render_json(r);
  CHECK(json.find("\"weighted_avg\"") != std::string::npos);
}

TEST_CASE("half-up display rounding") {
  CHECK(round_half_up(0.915, 2) == 0.92);
  CHECK(round_half_up(0.125, 2) == 0.13);
  CHECK(round_half_up(-0.125, 2) == -0.13);
  CHECK(round_half_up(0.124999, 2) == 0.12);
}
