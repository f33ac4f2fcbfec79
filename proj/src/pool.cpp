#include "alrank/pool.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "alrank/error.hpp"
#include "alrank/rng.hpp"
#include "alrank/select.hpp"

namespace alrank {

Pool::Pool(std::vector<ItemRecord> items) : items_(std::move(items)) {
  std::sort(items_.begin(), items_.end(),
            [](const ItemRecord& a, const ItemRecord& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const auto& it = items_[i];
    if (i > 0 && items_[i - 1].id == it.id) throw Error("duplicate item id: " + it.id);
    if (it.features.empty()) throw Error("item " + it.id + ": empty feature vector");
    if (i == 0) dim_ = it.features.size();
    if (it.features.size() != dim_)
      throw Error("item " + it.id + ": feature dimension " + std::to_string(it.features.size()) +
                  " differs from " + std::to_string(dim_));
    for (double f : it.features)
      if (!std::isfinite(f)) throw Error("item " + it.id + ": non-finite feature value");
    if (it.references.empty()) throw Error("item " + it.id + ": empty reference list");
  }
  round_labeled_.assign(items_.size(), std::nullopt);
}

const ItemRecord& Pool::item(const std::string& id) const {
  auto idx = index_of(id);
  if (!idx) throw Error("unknown item id: " + id);
  return items_[*idx];
}

std::optional<std::size_t> Pool::index_of(const std::string& id) const {
  auto it = std::lower_bound(items_.begin(), items_.end(), id,
                             [](const ItemRecord& r, const std::string& key) { return r.id < key; });
  if (it == items_.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - items_.begin());
}

std::vector<std::size_t> Pool::labeled_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < items_.size(); ++i)
    if (round_labeled_[i]) out.push_back(i);
  return out;
}

std::vector<std::size_t> Pool::unlabeled_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < items_.size(); ++i)
    if (!round_labeled_[i]) out.push_back(i);
  return out;
}

std::vector<std::string> Pool::labeled_ids() const {
  std::vector<std::string> out;
  for (auto i : labeled_indices()) out.push_back(items_[i].id);
  return out;
}

std::vector<std::string> Pool::unlabeled_ids() const {
  std::vector<std::string> out;
  for (auto i : unlabeled_indices()) out.push_back(items_[i].id);
  return out;
}

void Pool::restore_state(const std::vector<std::optional<int>>& round_labeled, int round) {
  if (round_labeled.size() != items_.size()) throw Error("pool state size does not match pool");
  if (round < 0) throw Error("pool state: negative round");
  round_labeled_ = round_labeled;
  labeled_count_ = static_cast<std::size_t>(
      std::count_if(round_labeled_.begin(), round_labeled_.end(), [](const auto& r) { return r.has_value(); }));
  round_ = round;
  seeded_ = labeled_count_ > 0;
}

Pool load_pool(std::vector<std::pair<std::string, FeatureVec>> features,
               std::vector<std::pair<std::string, std::vector<TokenSeq>>> references) {
  std::map<std::string, std::vector<TokenSeq>> refs;
  for (auto& [id, r] : references) {
    if (!refs.emplace(id, std::move(r)).second) throw Error("duplicate reference record for id: " + id);
  }
  std::vector<ItemRecord> items;
  items.reserve(features.size());
  std::set<std::string> seen;
  for (auto& [id, f] : features) {
    auto it = refs.find(id);
    if (it == refs.end()) throw Error("feature record without reference record: " + id);
    if (!seen.insert(id).second) throw Error("duplicate feature record for id: " + id);
    items.push_back(ItemRecord{id, std::move(f), std::move(it->second)});
  }
  for (const auto& [id, r] : refs)
    if (!seen.count(id)) throw Error("reference record without feature record: " + id);
  return Pool(std::move(items));
}

std::size_t batch_size_for(std::size_t pool_size, double fraction) {
  const auto n = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(pool_size) - 1e-9));
  return std::max<std::size_t>(n, 1);
}

Pool seed_split(const Pool& pool, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error("seed fraction must lie in (0, 1]");
  if (pool.seeded_ || pool.round_ != 0) throw Error("pool is already seeded");
  Pool out = pool;
  const std::size_t n = std::min(batch_size_for(pool.size(), fraction), pool.size());
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto rng = substream(seed, "split");
  // Partial Fisher-Yates: the first n slots are a uniform sample.
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  for (std::size_t i = 0; i < n; ++i) out.round_labeled_[order[i]] = 0;
  out.labeled_count_ = n;
  out.seeded_ = true;
  return out;
}

Pool apply_batch(const Pool& pool, const SelectionBatch& batch) {
  std::vector<std::size_t> idx;
  std::set<std::size_t> unique;
  for (const auto& id : batch.ids) {
    auto i = pool.index_of(id);
    if (!i) throw Error("batch contains unknown id: " + id);
    if (pool.round_labeled_[*i]) throw Error("batch contains already-labeled id: " + id);
    if (!unique.insert(*i).second) throw Error("batch contains duplicate id: " + id);
    idx.push_back(*i);
  }
  Pool out = pool;
  out.round_ += 1;
  for (auto i : idx) out.round_labeled_[i] = out.round_;
  out.labeled_count_ += idx.size();
  return out;
}

}  // namespace alrank
