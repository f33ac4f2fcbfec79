#include "alrank/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "alrank/error.hpp"
#include "alrank/rng.hpp"

namespace alrank {

void SyntheticConfig::validate() const {
  if (n_items < 1) throw Error("synthetic: n_items must be >= 1");
  if (n_val < 1) throw Error("synthetic: n_val must be >= 1");
  if (n_components < 1) throw Error("synthetic: n_components must be >= 1");
  if (dim < 1) throw Error("synthetic: dim must be >= 1");
  if (template_min < 1 || template_max < template_min) throw Error("synthetic: bad template length range");
  if (n_refs < 1) throw Error("synthetic: n_refs must be >= 1");
  if (noise_min < 0.0 || noise_max > 1.0 || noise_max < noise_min) throw Error("synthetic: bad noise range");
  if (!(blend_max >= 0.0 && blend_max <= 1.0)) throw Error("synthetic: blend_max must be in [0, 1]");
  if (vocab_size < 3) throw Error("synthetic: vocab_size must be >= 3");
  if (!(feature_noise >= 0.0) || !(center_scale >= 0.0)) throw Error("synthetic: scales must be >= 0");
}

SyntheticData make_synthetic(const SyntheticConfig& config) {
  config.validate();
  SyntheticData data;
  const auto nc = static_cast<std::size_t>(config.n_components);
  auto rng = substream(config.seed, "synthetic-components");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<Token> word(1, config.vocab_size - 1);
  std::uniform_int_distribution<int> length(config.template_min, config.template_max);

  std::vector<FeatureVec> centers(nc, FeatureVec(static_cast<std::size_t>(config.dim)));
  for (std::size_t c = 0; c < nc; ++c) {
    for (auto& x : centers[c]) x = config.center_scale * gauss(rng);
    TokenSeq tmpl(static_cast<std::size_t>(length(rng)));
    for (auto& t : tmpl) t = word(rng);
    data.templates.push_back(std::move(tmpl));
    data.noise_rate.push_back(config.noise_min + (config.noise_max - config.noise_min) * uniform01(rng));
    data.weight.push_back(std::pow(static_cast<double>(c + 1), -config.weight_exponent));
  }
  const double wsum = std::accumulate(data.weight.begin(), data.weight.end(), 0.0);
  for (auto& w : data.weight) w /= wsum;

  auto draw_items = [&](std::size_t n, const char* stream, const char* prefix, std::vector<int>& component,
                        std::vector<double>& blend) {
    auto r = substream(config.seed, stream);
    std::discrete_distribution<int> pick(data.weight.begin(), data.weight.end());
    std::vector<ItemRecord> items;
    items.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const int c = pick(r);
      const auto cu = static_cast<std::size_t>(c);
      ItemRecord it;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s%06zu", prefix, i);
      it.id = buf;
      std::size_t partner = cu;
      double t = 0.0;
      if (config.blend_max > 0.0 && nc > 1) {
        partner = (cu + 1 + static_cast<std::size_t>(uniform01(r) * static_cast<double>(nc - 1))) % nc;
        t = config.blend_max * uniform01(r);
      }
      it.features = centers[cu];
      for (std::size_t d = 0; d < it.features.size(); ++d)
        it.features[d] += t * (centers[partner][d] - centers[cu][d]) + config.feature_noise * gauss(r);
      for (int k = 0; k < config.n_refs; ++k) {
        const std::size_t src = uniform01(r) < t ? partner : cu;
        TokenSeq ref = data.templates[src];
        for (auto& tok : ref)
          if (uniform01(r) < data.noise_rate[src]) tok = word(r);
        it.references.push_back(std::move(ref));
      }
      component.push_back(c);
      blend.push_back(t);
      items.push_back(std::move(it));
    }
    return items;
  };

  data.pool = Pool(draw_items(config.n_items, "synthetic-pool", "item-", data.pool_component, data.pool_blend));
  data.validation = draw_items(config.n_val, "synthetic-val", "val-", data.val_component, data.val_blend);
  return data;
}

}  // namespace alrank
