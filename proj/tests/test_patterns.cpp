#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "randens/patterns.hpp"
#include "randens/random.hpp"
#include "randens/synth.hpp"

using namespace randens;
using std::chrono::days;

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752;

TimeSeries daily_series(Date start, std::size_t n_days, std::size_t n = 24, std::uint64_t seed = 3) {
  Rng rng(seed);
  std::vector<Timestamp> ts;
  std::vector<double> vals;
  const std::chrono::minutes step{1440 / static_cast<long>(n)};
  for (std::size_t d = 0; d < n_days; ++d)
    for (std::size_t h = 0; h < n; ++h) {
      ts.push_back(Timestamp{start + days{static_cast<long>(d)}} + static_cast<long>(h) * step);
      vals.push_back(100.0 + 10.0 * std::sin(static_cast<double>(h)) + rng.uniform(0.0, 5.0));
    }
  return TimeSeries(std::move(ts), std::move(vals), n);
}

}  // namespace

TEST(EncodeInput, SimpleSequence) {
  const std::vector<double> e{1, 2, 3};
  const auto enc = encode_input(e);
  EXPECT_NEAR(enc.pattern.x[0], -kInvSqrt2, 1e-12);
  EXPECT_NEAR(enc.pattern.x[1], 0.0, 1e-12);
  EXPECT_NEAR(enc.pattern.x[2], kInvSqrt2, 1e-12);
  EXPECT_DOUBLE_EQ(enc.coding.mean, 2.0);
  EXPECT_NEAR(enc.coding.dispersion, std::sqrt(2.0), 1e-12);
}

TEST(EncodeInput, ConstantSequenceIsZeroDispersion) {
  const std::vector<double> e{5, 5, 5};
  try {
    encode_input(e);
    FAIL() << "expected ZeroDispersion";
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::ZeroDispersion);
  }
  // Round-off level variation is still a constant cycle.
  const std::vector<double> tenth{0.1, 0.1, 0.1};
  EXPECT_THROW(encode_input(tenth), Error);
}

TEST(EncodeInput, UnifiedSequenceIsFixedPoint) {
  const std::vector<double> e{-kInvSqrt2, 0.0, kInvSqrt2};
  const auto enc = encode_input(e);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_NEAR(enc.pattern.x[t], e[t], 1e-15);
  EXPECT_NEAR(enc.coding.mean, 0.0, 1e-16);
  EXPECT_NEAR(enc.coding.dispersion, 1.0, 1e-15);
}

TEST(EncodeInput, RejectsNonFiniteAndShortInput) {
  const std::vector<double> bad{1.0, NAN, 3.0};
  try {
    encode_input(bad);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::NonFinite);
  }
  const std::vector<double> one{1.0};
  EXPECT_THROW(encode_input(one), Error);
}

TEST(EncodeOutput, UsesInputCoding) {
  const CodingVariables c{2.0, std::sqrt(2.0)};
  const std::vector<double> future{3, 4, 5};
  const auto y = encode_output(future, c);
  EXPECT_NEAR(y.y[0], kInvSqrt2, 1e-12);
  EXPECT_NEAR(y.y[1], 2 * kInvSqrt2, 1e-12);
  EXPECT_NEAR(y.y[2], 3 * kInvSqrt2, 1e-12);

  const std::vector<double> flat{2, 2, 2};
  for (double v : encode_output(flat, c).y) EXPECT_EQ(v, 0.0);
}

TEST(EncodeOutput, SameSequenceGivesInputPattern) {
  const std::vector<double> e{3.5, 7.25, 1.0, 9.0};
  const auto enc = encode_input(e);
  const auto y = encode_output(e, enc.coding);
  for (std::size_t t = 0; t < e.size(); ++t) EXPECT_DOUBLE_EQ(y.y[t], enc.pattern.x[t]);
}

TEST(EncodeOutput, RejectsBadCoding) {
  const std::vector<double> e{1, 2};
  try {
    encode_output(e, CodingVariables{1.0, 0.0});
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::ZeroDispersion);
  }
  EXPECT_THROW(encode_output(e, CodingVariables{NAN, 1.0}), Error);
}

TEST(Decode, InvertsEncoding) {
  const std::vector<double> y{-kInvSqrt2, 0.0, kInvSqrt2};
  const auto e = decode(y, CodingVariables{2.0, std::sqrt(2.0)});
  EXPECT_NEAR(e[0], 1.0, 1e-12);
  EXPECT_NEAR(e[1], 2.0, 1e-12);
  EXPECT_NEAR(e[2], 3.0, 1e-12);

  const std::vector<double> zero{0, 0, 0};
  for (double v : decode(zero, CodingVariables{7.0, 3.0})) EXPECT_EQ(v, 7.0);

  const std::vector<double> inf{1.0, INFINITY};
  EXPECT_THROW(decode(inf, CodingVariables{0.0, 1.0}), Error);
}

TEST(PatternProperties, NormalizationRoundTripAndAffineInvariance) {
  Rng rng(20240611);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(40);
    std::vector<double> s(n);
    const double scale = std::pow(10.0, rng.uniform(-3.0, 5.0));
    for (auto& v : s) v = rng.normal(rng.uniform(-100, 100), 1.0) * scale;
    const auto enc = encode_input(s);
    const double mean = std::accumulate(enc.pattern.x.begin(), enc.pattern.x.end(), 0.0) / static_cast<double>(n);
    double norm = 0.0;
    for (double v : enc.pattern.x) norm += v * v;
    EXPECT_LT(std::abs(mean), 1e-10);
    EXPECT_LT(std::abs(std::sqrt(norm) - 1.0), 1e-10);

    const auto back = decode(encode_output(s, enc.coding).y, enc.coding);
    for (std::size_t t = 0; t < n; ++t) EXPECT_LE(std::abs(back[t] - s[t]), 1e-9 * std::max(1.0, std::abs(s[t])));

    const double a = rng.uniform(0.01, 100.0), b = rng.uniform(-1e3, 1e3);
    std::vector<double> affine(n);
    for (std::size_t t = 0; t < n; ++t) affine[t] = a * s[t] + b;
    const auto enc2 = encode_input(affine);
    for (std::size_t t = 0; t < n; ++t) EXPECT_NEAR(enc2.pattern.x[t], enc.pattern.x[t], 1e-9);
  }
}

// 21 daily cycles starting on a Monday; day 22 is then a Monday.
TEST(BuildTrainingSet, WeekdayPairingSelectsSundayToMonday) {
  const Date start{std::chrono::year{2024} / std::chrono::January / 1};
  ASSERT_EQ(weekday_of(start), std::chrono::Monday);
  const auto series = daily_series(start, 21);
  const Date query = start + days{21};
  ASSERT_EQ(weekday_of(query), std::chrono::Monday);

  const auto phi = build_training_set(series, query, {1, true, {}});
  ASSERT_EQ(phi.size(), 2u);  // Jan 7 -> Jan 8, Jan 14 -> Jan 15
  for (const auto& p : phi.pairs) {
    EXPECT_EQ(weekday_of(p.input_date), std::chrono::Sunday);
    EXPECT_EQ(weekday_of(p.output_date), std::chrono::Monday);
    EXPECT_EQ(p.output_date - p.input_date, days{1});
  }
  EXPECT_EQ(phi.pairs[0].input_date, start + days{6});
  EXPECT_EQ(phi.pairs[1].input_date, start + days{13});
}

TEST(BuildTrainingSet, WithoutPairingUsesAllAdjacentCycles) {
  const Date start{std::chrono::year{2024} / std::chrono::January / 1};
  const auto series = daily_series(start, 21);
  const auto phi = build_training_set(series, start + days{21}, {1, false, {}});
  ASSERT_EQ(phi.size(), 20u);
  for (std::size_t i = 1; i < phi.size(); ++i) EXPECT_LT(phi.pairs[i - 1].input.source_index, phi.pairs[i].input.source_index);
  EXPECT_EQ(phi.n, 24u);
}

TEST(BuildTrainingSet, PairsMatchEncodingOfTheirCycles) {
  const Date start{std::chrono::year{2024} / std::chrono::March / 4};
  const CycleIndex cycles(daily_series(start, 30));
  const auto phi = build_training_set(cycles, start + days{30}, {1, false, {}});
  for (const auto& p : phi.pairs) {
    const auto* in = cycles.find(p.input_date);
    const auto* out = cycles.find(p.output_date);
    const auto enc = encode_input(*in);
    EXPECT_EQ(enc.pattern.x, p.input.x);
    EXPECT_EQ(encode_output(out->values, enc.coding).y, p.output.y);
  }
}

// Brute-force oracle: enumerate every (d, d + tau) pair of calendar days in
// the raw 4-year series and apply the filters one by one.
TEST(BuildTrainingSet, ExcludedDateRemovesEveryTouchingPair) {
  SynthParams p;
  p.start = Date{std::chrono::year{2012} / std::chrono::January / 1};
  p.days = 4 * 365 + 1;
  p.noise_sd = 0.01;
  const TimeSeries full = synth_series(p);
  const Date excluded{std::chrono::year{2014} / std::chrono::May / 1};

  std::vector<Timestamp> ts;
  std::vector<double> vals;
  for (std::size_t k = 0; k < full.size(); ++k)
    if (date_of(full.timestamps()[k]) != excluded) {
      ts.push_back(full.timestamps()[k]);
      vals.push_back(full.values()[k]);
    }
  const TimeSeries series(ts, vals, 24);
  const Date query = p.start + days{static_cast<long>(p.days) - 1};

  for (bool pairing : {false, true}) {
    for (int tau : {1, 2}) {
      const auto phi = build_training_set(series, query, {tau, pairing, {}});
      std::set<Date> got;
      for (const auto& pair : phi.pairs) got.insert(pair.input_date);

      std::set<Date> expect;
      for (long d = 0; d < static_cast<long>(p.days); ++d) {
        const Date in = p.start + days{d};
        const Date out = in + days{tau};
        if (out > query - days{tau}) continue;
        if (in == excluded || out == excluded) continue;
        if (pairing && (weekday_of(in) != weekday_of(query - days{tau}) || weekday_of(out) != weekday_of(query))) continue;
        expect.insert(in);
      }
      EXPECT_EQ(got, expect) << "pairing=" << pairing << " tau=" << tau;
      for (const auto& pair : phi.pairs) {
        EXPECT_NE(pair.input_date, excluded);
        EXPECT_NE(pair.output_date, excluded);
      }
    }
  }
}

TEST(BuildTrainingSet, ExplicitExclusionsAndErrors) {
  const Date start{std::chrono::year{2024} / std::chrono::January / 1};
  const auto series = daily_series(start, 21);
  const Date query = start + days{21};
  TrainingSetOptions opt{1, false, {start + days{5}}};
  const auto phi = build_training_set(series, query, opt);
  EXPECT_EQ(phi.size(), 18u);  // pairs (4,5) and (5,6) dropped

  try {
    build_training_set(series, start + days{1}, {1, false, {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyTrainingSet);
  }

  std::vector<Timestamp> ts(series.timestamps().begin(), series.timestamps().end() - 1);
  std::vector<double> vals(series.values().begin(), series.values().end() - 1);
  try {
    build_training_set(TimeSeries(ts, vals, 24), query, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MisalignedCycles);
  }
}

TEST(BuildTrainingSet, Deterministic) {
  const Date start{std::chrono::year{2023} / std::chrono::June / 1};
  const auto series = daily_series(start, 60);
  const auto a = build_training_set(series, start + days{60});
  const auto b = build_training_set(series, start + days{60});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.pairs[i].input.x, b.pairs[i].input.x);
    EXPECT_EQ(a.pairs[i].output.y, b.pairs[i].output.y);
  }
}
