#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "alrank/cluster.hpp"
#include "alrank/pool.hpp"
#include "alrank/scorers.hpp"
#include "alrank/select.hpp"

// Readers and writers for the engine's JSONL record streams. Readers throw
// alrank::Error with "<source>:<line>: <reason>" on any schema violation.
// Writers emit keys in the documented order, one compact object per line.

namespace alrank::jsonl {

using FeatureRecords = std::vector<std::pair<std::string, FeatureVec>>;
using PoolStateRecords = std::vector<std::pair<std::string, std::optional<int>>>;
using ReferenceRecords = std::vector<std::pair<std::string, std::vector<TokenSeq>>>;

FeatureRecords read_features(std::istream& in, const std::string& source = "features");
ReferenceRecords read_references(std::istream& in, const std::string& source = "references");
void write_features(std::ostream& out, const Pool& pool);
void write_references(std::ostream& out, const Pool& pool);

/// Groups per-sample records by id and validates every set. `vocab_size`
/// defaults to one more than the largest token id in the stream.
/// `tolerance` bounds |sum(p) + rem - 1| per position.
std::map<std::string, EnsembleCaptionSet> read_ensemble_scores(
    std::istream& in, std::optional<std::int32_t> vocab_size = std::nullopt,
    const std::string& source = "ensemble-scores", double tolerance = 1e-4);
void write_ensemble_scores(std::ostream& out, const std::map<std::string, EnsembleCaptionSet>& sets);

void write_pool_state(std::ostream& out, const Pool& pool);
/// Applies a dumped partition to `pool` (ids must match exactly).
PoolStateRecords read_pool_state_records(std::istream& in, const std::string& source = "pool-state");
void read_pool_state(std::istream& in, Pool& pool, const std::string& source = "pool-state");

void write_clustering(std::ostream& out, const Clustering& clustering);
/// Reads the header and assignments; centroids are not part of the dump.
Clustering read_clustering(std::istream& in, const std::string& source = "clustering");

void write_batch(std::ostream& out, const SelectionBatch& batch);
std::vector<SelectionBatch> read_batches(std::istream& in, const std::string& source = "batch");

void write_scores(std::ostream& out, const std::vector<ScoreReport>& reports);
std::vector<ScoreReport> read_scores(std::istream& in, const std::string& source = "scores");

}  // namespace alrank::jsonl
