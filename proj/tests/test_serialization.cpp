#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "randens/ensemble.hpp"
#include "randens/serialization.hpp"

using namespace randens;

namespace {

TrainingSet small_set() {
  Rng rng(21);
  TrainingSet phi;
  phi.n = 12;
  for (int i = 0; i < 15; ++i) {
    std::vector<double> e(12), f(12);
    for (auto& v : e) v = rng.normal(100.0, 10.0);
    for (auto& v : f) v = rng.normal(100.0, 10.0);
    auto enc = encode_input(e);
    PatternPair p;
    p.output = encode_output(f, enc.coding);
    p.input = std::move(enc.pattern);
    p.coding = enc.coding;
    phi.pairs.push_back(std::move(p));
  }
  return phi;
}

void expect_same_model(const RandNNModel& a, const RandNNModel& b) {
  EXPECT_EQ(a.hidden_weights, b.hidden_weights);
  EXPECT_EQ(a.hidden_biases, b.hidden_biases);
  EXPECT_EQ(a.output_weights, b.output_weights);
  EXPECT_EQ(a.feature_mask, b.feature_mask);
  EXPECT_EQ(a.config.m, b.config.m);
  EXPECT_EQ(a.config.seed, b.config.seed);
  EXPECT_EQ(std::bit_cast<std::uint64_t>(a.config.alpha_max), std::bit_cast<std::uint64_t>(b.config.alpha_max));
}

}  // namespace

TEST(Base64, RfcVectors) {
  auto enc = [](std::string s) { return detail::base64_encode({s.begin(), s.end()}); };
  EXPECT_EQ(enc(""), "");
  EXPECT_EQ(enc("f"), "Zg==");
  EXPECT_EQ(enc("fo"), "Zm8=");
  EXPECT_EQ(enc("foo"), "Zm9v");
  EXPECT_EQ(enc("foob"), "Zm9vYg==");
  EXPECT_EQ(enc("fooba"), "Zm9vYmE=");
  EXPECT_EQ(enc("foobar"), "Zm9vYmFy");
  const auto back = detail::base64_decode("Zm9vYmE=");
  EXPECT_EQ(std::string(back.begin(), back.end()), "fooba");
  EXPECT_THROW(detail::base64_decode("Zm9"), Error);
  EXPECT_THROW(detail::base64_decode("Zm=v"), Error);
  EXPECT_THROW(detail::base64_decode("Zm!v"), Error);
}

TEST(Base64, DoublesAreBitExact) {
  const double vals[] = {0.0, -0.0, 1.0 / 3.0, std::numeric_limits<double>::denorm_min(),
                         std::numeric_limits<double>::max(), -1e-300};
  const auto back = detail::unpack_f64(detail::pack_f64(vals, 6), 6);
  for (int i = 0; i < 6; ++i)
    EXPECT_EQ(std::bit_cast<std::uint64_t>(back[static_cast<std::size_t>(i)]), std::bit_cast<std::uint64_t>(vals[i]));
  // 1.0 is 0x3FF0000000000000, little-endian.
  const double one = 1.0;
  EXPECT_EQ(detail::pack_f64(&one, 1), "AAAAAAAA8D8=");
}

TEST(ModelJson, RoundTripIsBitExact) {
  const auto phi = small_set();
  const auto model = train(phi, RandNNConfig{17, 63.3, 4});
  const auto text = to_json(model).dump();
  const auto back = model_from_json(nlohmann::json::parse(text));
  expect_same_model(model, back);
  const auto& x = phi.pairs[3].input.x;
  EXPECT_EQ(predict(model, std::span<const double>(x)), predict(back, std::span<const double>(x)));
}

TEST(EnsembleJson, RoundTripIsBitExact) {
  const auto phi = small_set();
  for (const DiversityStrategy s : {DiversityStrategy{Strategy::E1, 45.5}, DiversityStrategy{Strategy::E3, 0.6, 20},
                                    DiversityStrategy{Strategy::E4, 0.5, 30, false}}) {
    const auto ens = train_ensemble(phi, s, 4, RandNNConfig{10, 70.0, 9});
    const auto back = ensemble_from_json(nlohmann::json::parse(to_json(ens).dump()));
    ASSERT_EQ(back.size(), ens.size());
    EXPECT_EQ(back.strategy.kind, s.kind);
    EXPECT_EQ(back.strategy.parameter, s.parameter);
    EXPECT_EQ(back.strategy.base_m, s.base_m);
    for (std::size_t k = 0; k < ens.size(); ++k) expect_same_model(ens.members[k], back.members[k]);
    ASSERT_EQ(back.shared_template.has_value(), ens.shared_template.has_value());
    if (ens.shared_template) {
      EXPECT_EQ(back.shared_template->weights, ens.shared_template->weights);
      EXPECT_EQ(back.shared_template->anchors, ens.shared_template->anchors);
    }
    const auto& q = phi.pairs[0];
    EXPECT_EQ(predict_ensemble(ens, q.input.x, q.coding), predict_ensemble(back, q.input.x, q.coding));
  }
}

TEST(ModelJson, RejectsMalformedDocuments) {
  const auto model = train(small_set(), RandNNConfig{5, 70.0, 1});
  auto expect_parse_error = [](const nlohmann::json& j) {
    try {
      model_from_json(j);
      ADD_FAILURE() << j.dump().substr(0, 80);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ParseError);
    }
  };
  auto j = to_json(model);
  j["version"] = 2;
  expect_parse_error(j);
  j = to_json(model);
  j["format"] = "something-else";
  expect_parse_error(j);
  j = to_json(model);
  j.erase("output_weights");
  expect_parse_error(j);
  j = to_json(model);
  j["hidden_biases"]["rows"] = 4;
  expect_parse_error(j);
  j = to_json(model);
  j["feature_mask"] = std::vector<bool>(12, false);
  expect_parse_error(j);
  expect_parse_error(nlohmann::json::array());

  auto e = to_json(train_ensemble(small_set(), {Strategy::E2, 0.5}, 2, RandNNConfig{5, 70.0, 1}));
  e["M"] = 3;
  EXPECT_THROW(ensemble_from_json(e), Error);
}
