#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "randens/ensemble.hpp"
#include "randens/error.hpp"
#include "randens/randnn.hpp"

// Model files are JSON. Real matrices are stored as
//   {"rows": r, "cols": c, "f64le": "<base64>"}
// where the payload is the row-major sequence of IEEE-754 binary64 values in
// little-endian byte order, so a write/read cycle reproduces every bit.

namespace randens {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline constexpr std::string_view kBase64Alphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    for (int s = 18; s >= 0; s -= 6) out.push_back(kBase64Alphabet[(v >> s) & 63]);
  }
  if (const std::size_t rest = bytes.size() - i; rest > 0) {
    std::uint32_t v = bytes[i] << 16;
    if (rest == 2) v |= bytes[i + 1] << 8;
    out.push_back(kBase64Alphabet[(v >> 18) & 63]);
    out.push_back(kBase64Alphabet[(v >> 12) & 63]);
    out.push_back(rest == 2 ? kBase64Alphabet[(v >> 6) & 63] : '=');
    out.push_back('=');
  }
  return out;
}

inline std::vector<std::uint8_t> base64_decode(std::string_view text) {
  std::array<int, 256> lookup{};
  lookup.fill(-1);
  for (std::size_t c = 0; c < kBase64Alphabet.size(); ++c)
    lookup[static_cast<unsigned char>(kBase64Alphabet[c])] = static_cast<int>(c);
  if (text.size() % 4 != 0) throw Error(ErrorCode::ParseError, "base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::uint32_t v = 0;
    int pad = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const char ch = text[i + k];
      int d = 0;
      if (ch == '=' && i + 4 == text.size() && k >= 2) {
        ++pad;
      } else {
        d = lookup[static_cast<unsigned char>(ch)];
        if (d < 0 || pad > 0) throw Error(ErrorCode::ParseError, "invalid base64 payload");
      }
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

inline std::string pack_f64(const double* data, std::size_t count) {
  std::vector<std::uint8_t> bytes(count * 8);
  for (std::size_t i = 0; i < count; ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(data[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + static_cast<std::size_t>(b)] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  return base64_encode(bytes);
}

inline std::vector<double> unpack_f64(std::string_view text, std::size_t expected) {
  const auto bytes = base64_decode(text);
  if (bytes.size() != expected * 8) throw Error(ErrorCode::ParseError, "matrix payload has the wrong size");
  std::vector<double> out(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[i * 8 + static_cast<std::size_t>(b)]) << (8 * b);
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

inline nlohmann::json matrix_to_json(const Matrix& A) {
  const RowMatrix R = A;
  return {{"rows", A.rows()}, {"cols", A.cols()}, {"f64le", pack_f64(R.data(), static_cast<std::size_t>(R.size()))}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  if (rows < 0 || cols < 0) throw Error(ErrorCode::ParseError, "negative matrix dimension");
  const auto vals = unpack_f64(j.at("f64le").get<std::string>(), static_cast<std::size_t>(rows * cols));
  RowMatrix R(rows, cols);
  std::copy(vals.begin(), vals.end(), R.data());
  return R;
}

}  // namespace detail

inline nlohmann::json to_json(const RandNNModel& model) {
  nlohmann::json j;
  j["format"] = "randnn-model";
  j["version"] = kModelFormatVersion;
  j["config"] = {{"m", model.config.m},
                 {"alpha_max", detail::pack_f64(&model.config.alpha_max, 1)},
                 {"seed", model.config.seed}};
  j["hidden_weights"] = detail::matrix_to_json(model.hidden_weights);
  j["hidden_biases"] = detail::matrix_to_json(model.hidden_biases);
  j["output_weights"] = detail::matrix_to_json(model.output_weights);
  if (model.feature_mask) j["feature_mask"] = *model.feature_mask;
  return j;
}

inline RandNNModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "randnn-model") throw Error(ErrorCode::ParseError, "not a randnn-model document");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw Error(ErrorCode::ParseError, "unsupported model format version");
    RandNNModel m;
    const auto& c = j.at("config");
    m.config.m = c.at("m").get<std::size_t>();
    m.config.alpha_max = detail::unpack_f64(c.at("alpha_max").get<std::string>(), 1)[0];
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.hidden_weights = detail::matrix_from_json(j.at("hidden_weights"));
    const Matrix b = detail::matrix_from_json(j.at("hidden_biases"));
    m.hidden_biases = Eigen::Map<const Vector>(b.data(), b.size());
    m.output_weights = detail::matrix_from_json(j.at("output_weights"));
    if (j.contains("feature_mask")) m.feature_mask = j.at("feature_mask").get<std::vector<bool>>();
    if (m.hidden_biases.size() != m.hidden_weights.rows() || m.output_weights.rows() != m.hidden_weights.rows())
      throw Error(ErrorCode::ParseError, "model matrices are not conformant");
    if (m.feature_mask && active_features(*m.feature_mask).size() != m.input_dim())
      throw Error(ErrorCode::ParseError, "feature mask does not match the hidden weight width");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed model document: ") + e.what());
  }
}

inline nlohmann::json to_json(const Ensemble& ens) {
  nlohmann::json j;
  j["format"] = "randnn-ensemble";
  j["version"] = kModelFormatVersion;
  j["strategy"] = {{"kind", std::string(to_string(ens.strategy.kind))},
                   {"parameter", detail::pack_f64(&ens.strategy.parameter, 1)},
                   {"base_m", ens.strategy.base_m},
                   {"reuse_template_biases", ens.strategy.reuse_template_biases}};
  j["M"] = ens.size();
  auto members = nlohmann::json::array();
  for (const auto& m : ens.members) members.push_back(to_json(m));
  j["members"] = std::move(members);
  if (ens.shared_template) {
    const auto& t = *ens.shared_template;
    j["shared_template"] = {{"weights", detail::matrix_to_json(t.weights)},
                            {"biases", detail::matrix_to_json(t.biases)},
                            {"anchors", t.anchors}};
  }
  return j;
}

inline Ensemble ensemble_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "randnn-ensemble") throw Error(ErrorCode::ParseError, "not a randnn-ensemble document");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw Error(ErrorCode::ParseError, "unsupported ensemble format version");
    Ensemble ens;
    const auto& s = j.at("strategy");
    ens.strategy.kind = parse_strategy(s.at("kind").get<std::string>());
    ens.strategy.parameter = detail::unpack_f64(s.at("parameter").get<std::string>(), 1)[0];
    ens.strategy.base_m = s.at("base_m").get<std::size_t>();
    ens.strategy.reuse_template_biases = s.at("reuse_template_biases").get<bool>();
    for (const auto& m : j.at("members")) ens.members.push_back(model_from_json(m));
    if (ens.members.size() != j.at("M").get<std::size_t>())
      throw Error(ErrorCode::ParseError, "member count does not match M");
    if (j.contains("shared_template")) {
      const auto& t = j.at("shared_template");
      HiddenLayer layer;
      layer.weights = detail::matrix_from_json(t.at("weights"));
      const Matrix b = detail::matrix_from_json(t.at("biases"));
      layer.biases = Eigen::Map<const Vector>(b.data(), b.size());
      layer.anchors = t.at("anchors").get<std::vector<std::size_t>>();
      ens.shared_template = std::move(layer);
    }
    return ens;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed ensemble document: ") + e.what());
  }
}

}  // namespace randens
