#pragma once

#include <cstdint>
#include <vector>

#include "alrank/pool.hpp"

namespace alrank {

/// Gaussian-mixture features with one caption template per component.
/// Component weights follow a power law, and each component corrupts its
/// template tokens at its own noise rate, so some regions are rare and some
/// are ambiguous.
struct SyntheticConfig {
  std::size_t n_items = 2000;
  std::size_t n_val = 400;
  int n_components = 40;
  int dim = 16;
  double center_scale = 6.0;
  double feature_noise = 1.0;
  double weight_exponent = 1.0;  // weight of component c is proportional to (c + 1)^-exponent
  int template_min = 5;
  int template_max = 9;
  int n_refs = 5;
  double noise_min = 0.0;
  double noise_max = 0.3;
  // Each item leans toward a random partner component by t ~ U(0, blend_max):
  // its features move a fraction t toward the partner center and each
  // reference is the partner's template with probability t.
  double blend_max = 0.0;
  std::int32_t vocab_size = 64;  // token 0 is end-of-sequence and never appears in references
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticData {
  Pool pool;
  std::vector<ItemRecord> validation;
  std::vector<int> pool_component;  // indexed like pool.items()
  std::vector<int> val_component;
  std::vector<double> pool_blend;
  std::vector<double> val_blend;
  std::vector<TokenSeq> templates;
  std::vector<double> noise_rate;
  std::vector<double> weight;
};

SyntheticData make_synthetic(const SyntheticConfig& config);

}  // namespace alrank
