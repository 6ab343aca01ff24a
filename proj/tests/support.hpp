#pragma once

#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vmpforge/bn/ground.hpp"
#include "vmpforge/bn/plate_tree.hpp"

namespace vmpforge::testing {

inline std::string model_path(const std::string& file) {
  return std::string(VMPFORGE_MODELS_DIR) + "/" + file;
}

inline std::string read_model(const std::string& file) {
  std::ifstream in(model_path(file));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline const bn::PlateTree& compiled(const std::string& file) {
  static std::map<std::string, bn::PlateTree> cache;
  auto it = cache.find(file);
  if (it == cache.end()) it = cache.emplace(file, bn::compile_model(read_model(file))).first;
  return it->second;
}

inline bn::GroundNetwork two_coins(const std::vector<std::int64_t>& x, double alpha = 1.0,
                                   double beta = 1.0) {
  return bn::ground(compiled("two_coins.ispk"), {{"alpha", alpha}, {"beta", beta}},
                    {{"x", bn::Observation::flat(x)}});
}

inline bn::GroundNetwork single_coin(const std::vector<std::int64_t>& x, double alpha = 1.0) {
  return bn::ground(compiled("single_coin.ispk"), {{"alpha", alpha}}, {{"x", bn::Observation::flat(x)}});
}

inline std::vector<std::int64_t> random_flips(std::size_t n, double p_head, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution flip(p_head);
  std::vector<std::int64_t> x(n);
  for (auto& v : x) v = flip(rng) ? 1 : 0;
  return x;
}

/// Documents drawn from K skewed topics over V words.
inline std::vector<std::vector<std::int64_t>> synthetic_docs(std::size_t docs, std::size_t words_per_doc,
                                                             std::size_t k, std::size_t v,
                                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::discrete_distribution<std::int64_t>> topics;
  for (std::size_t t = 0; t < k; ++t) {
    std::vector<double> w(v, 0.2);
    for (std::size_t j = t * v / k; j < (t + 1) * v / k; ++j) w[j] = 5.0;
    topics.emplace_back(w.begin(), w.end());
  }
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  std::uniform_int_distribution<std::size_t> jitter(0, words_per_doc / 4);
  std::vector<std::vector<std::int64_t>> out(docs);
  for (auto& doc : out) {
    const std::size_t a = pick(rng);
    const std::size_t b = pick(rng);
    const std::size_t len = words_per_doc - words_per_doc / 8 + jitter(rng);
    for (std::size_t i = 0; i < len; ++i) doc.push_back(topics[i % 3 == 0 ? b : a](rng));
  }
  return out;
}

inline bn::GroundNetwork lda(const std::vector<std::vector<std::int64_t>>& docs, std::size_t k,
                             std::size_t v, double alpha = 0.5, double beta = 0.1,
                             const std::string& file = "lda.ispk") {
  return bn::ground(compiled(file),
                    {{"K", static_cast<double>(k)}, {"V", static_cast<double>(v)}, {"alpha", alpha}, {"beta", beta}},
                    {{"x", bn::Observation::nested(docs)}});
}

/// Documents split into sentences of 2 to 6 words, one topic per sentence.
inline bn::Observation synthetic_sentences(std::size_t docs, std::size_t sentences, std::size_t k,
                                           std::size_t v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> topic(0, k - 1);
  std::uniform_int_distribution<std::size_t> length(2, 6);
  std::uniform_int_distribution<std::size_t> word(0, v / k - 1);
  bn::Observation obs;
  obs.levels = {{docs}, {}, {}};
  for (std::size_t d = 0; d < docs; ++d) {
    obs.levels[1].push_back(sentences);
    for (std::size_t s = 0; s < sentences; ++s) {
      const std::size_t t = topic(rng);
      const std::size_t len = length(rng);
      obs.levels[2].push_back(len);
      for (std::size_t i = 0; i < len; ++i) obs.values.push_back(static_cast<std::int64_t>(t * (v / k) + word(rng)));
    }
  }
  return obs;
}

inline bn::GroundNetwork slda(const bn::Observation& obs, std::size_t k, std::size_t v) {
  return bn::ground(compiled("slda.ispk"),
                    {{"K", static_cast<double>(k)}, {"V", static_cast<double>(v)}, {"alpha", 0.5}, {"beta", 0.1}},
                    {{"x", obs}});
}

/// Mixture graph with N latent-free observation slots; only the structure
/// matters for partition statistics.
inline bn::GroundNetwork mixture(std::size_t n, std::size_t d, std::size_t k) {
  return bn::ground(compiled("mixture.ispk"),
                    {{"K", static_cast<double>(k)}, {"D", static_cast<double>(d)}, {"alpha", 1.0}, {"beta", 1.0}},
                    {}, {{"x", n}});
}

}  // namespace vmpforge::testing
