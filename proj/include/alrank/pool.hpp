#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace alrank {

using Token = std::int32_t;
using TokenSeq = std::vector<Token>;
using FeatureVec = std::vector<double>;

struct ItemRecord {
  std::string id;
  FeatureVec features;
  std::vector<TokenSeq> references;
};

struct SelectionBatch;

/// Labeled/unlabeled partition over a fixed set of items.
///
/// Items are stored in ascending id order and every listing the pool hands out
/// follows that order. `round()` counts applied acquisition batches; the seed
/// split does not count as a round.
class Pool {
 public:
  Pool() = default;

  /// Validates and sorts `items`. All items start unlabeled.
  explicit Pool(std::vector<ItemRecord> items);

  std::size_t size() const { return items_.size(); }
  std::size_t dim() const { return dim_; }
  int round() const { return round_; }
  bool seeded() const { return seeded_; }

  const std::vector<ItemRecord>& items() const { return items_; }
  const ItemRecord& item(std::size_t index) const { return items_[index]; }
  const ItemRecord& item(const std::string& id) const;
  std::optional<std::size_t> index_of(const std::string& id) const;

  bool is_labeled(std::size_t index) const { return round_labeled_[index].has_value(); }
  /// Round in which the item was labeled (0 for the seed split).
  std::optional<int> round_labeled(std::size_t index) const { return round_labeled_[index]; }

  std::vector<std::size_t> labeled_indices() const;
  std::vector<std::size_t> unlabeled_indices() const;
  std::vector<std::string> labeled_ids() const;
  std::vector<std::string> unlabeled_ids() const;
  std::size_t labeled_count() const { return labeled_count_; }
  std::size_t unlabeled_count() const { return items_.size() - labeled_count_; }

  /// Restores a dumped partition. Used by the CLI when a pool-state file is given.
  void restore_state(const std::vector<std::optional<int>>& round_labeled, int round);

  friend Pool seed_split(const Pool& pool, double fraction, std::uint64_t seed);
  friend Pool apply_batch(const Pool& pool, const SelectionBatch& batch);

 private:
  std::vector<ItemRecord> items_;
  std::vector<std::optional<int>> round_labeled_;
  std::size_t labeled_count_ = 0;
  std::size_t dim_ = 0;
  int round_ = 0;
  bool seeded_ = false;
};

/// Joins feature and reference records by id. Throws alrank::Error naming the
/// offending id on mismatch, dimension inconsistency or empty references.
Pool load_pool(std::vector<std::pair<std::string, FeatureVec>> features,
               std::vector<std::pair<std::string, std::vector<TokenSeq>>> references);

/// Labels ceil(fraction * N) uniformly chosen items.
Pool seed_split(const Pool& pool, double fraction, std::uint64_t seed);

/// Moves every batch id to labeled and advances the round. All-or-nothing.
Pool apply_batch(const Pool& pool, const SelectionBatch& batch);

/// ceil(fraction * N), at least 1.
std::size_t batch_size_for(std::size_t pool_size, double fraction);

}  // namespace alrank
