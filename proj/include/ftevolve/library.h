// Copyright 2026 The ft-evolve Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FTEVOLVE_LIBRARY_H_
#define FTEVOLVE_LIBRARY_H_

// The experience library: downstream-verified transformation sequences with
// their scores, plus the quality-diversity context selection over them.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ftevolve/eval.h"
#include "ftevolve/expr.h"
#include "ftevolve/table.h"

namespace ftevolve {

struct DatasetSignature {
  std::string name;
  int rows = 0;
  int features = 0;
  TaskKind task = TaskKind::kRegression;
  std::string columns_hash;  // FNV-1a 64 of the feature names, hex

  bool operator==(const DatasetSignature&) const = default;
};

DatasetSignature SignatureOfDataset(const Dataset& dataset);

enum class Origin { kRl, kLlm, kEnhancement };
std::string_view OriginName(Origin origin);
Origin ParseOrigin(std::string_view text);

struct Experience {
  TransformationSequence sequence;
  // NaN value marks an experience that has not been downstream-verified.
  Score score{std::numeric_limits<double>::quiet_NaN(), Metric::kOneMinusRae};
  DatasetSignature dataset;
  Origin origin = Origin::kRl;
  int iteration = 0;

  bool verified() const;
};

// Sorted (operator name, count clipped at 3) pairs over every token.
using PatternSignature = std::vector<std::pair<std::string, int>>;
PatternSignature SignatureOf(const Experience& experience);

// Jaccard index over the sets of postfix combination strings.
double Similarity(const Experience& a, const Experience& b);

// -sum p(z) ln p(z) over the pattern signatures. Throws kEmptySelection.
double Entropy(std::span<const Experience> selection);
double Entropy(std::span<const Experience* const> selection);

// Mean similarity over ordered pairs i != j; 0 for a singleton.
// Throws kEmptySelection.
double Redundancy(std::span<const Experience> selection);
double Redundancy(std::span<const Experience* const> selection);

struct SelectionParams {
  int k = 5;
  double lambda = 0.05;
  double mu = 0.10;
};

// mean score + lambda * H(S) - mu * Red(S).
double SelectionObjective(std::span<const Experience* const> selection,
                          double lambda, double mu);

struct WriteBackResult {
  int added = 0;
  int dropped_duplicate = 0;
  int dropped_near_duplicate = 0;
  std::vector<std::size_t> accepted;  // positions within the incoming span
};

class ExperienceLibrary {
 public:
  ExperienceLibrary() = default;

  const std::vector<Experience>& experiences() const { return experiences_; }
  std::size_t size() const { return experiences_.size(); }
  std::int64_t version() const { return version_; }

  // Library indices of the experiences recorded for `dataset`, in order.
  std::vector<std::size_t> IndicesFor(const DatasetSignature& dataset) const;
  std::optional<double> BestScore(const DatasetSignature& dataset) const;

  // Greedy quality-diversity selection among the experiences for `dataset`.
  // Returns library indices in selection (descending marginal gain) order.
  // Ties go to the higher score, then the earlier library index.
  // Throws kInsufficientExperiences, kInvalidArgument (k < 1, negative
  // weights).
  std::vector<std::size_t> SelectContext(const DatasetSignature& dataset,
                                         const SelectionParams& params) const;
  // Same greedy rule restricted to `candidates` (library indices).
  std::vector<std::size_t> SelectFrom(std::span<const std::size_t> candidates,
                                      const SelectionParams& params) const;

  // Merges verified experiences. An incoming item is dropped when its
  // postfix rendering already exists for the same dataset, or when its
  // similarity to a same-dataset experience exceeds `dedup_threshold` and
  // its score is not higher. Incoming items are considered in order, so
  // earlier accepted items take part in later checks. Bumps the version once.
  // Throws kUnverifiedExperience (library left unchanged).
  WriteBackResult WriteBack(std::span<const Experience> incoming,
                            double dedup_threshold = 0.9);

  // Drops the experiences at `indices` (any order, duplicates ignored).
  // Bumps the version when something was removed. Returns the count.
  std::size_t Remove(std::span<const std::size_t> indices);

  std::string ToJson() const;
  // Throws kMalformedLibrary.
  static ExperienceLibrary FromJson(std::string_view text);

  // Missing file yields an empty library.
  static ExperienceLibrary Load(const std::filesystem::path& path);
  // Writes through a temporary file and renames it over `path`.
  void Save(const std::filesystem::path& path) const;

  // FNV-1a 64 of ToJson().
  std::uint64_t ContentHash() const;

 private:
  std::vector<Experience> experiences_;
  std::int64_t version_ = 0;
};

std::uint64_t Fnv1a64(std::string_view data);

}  // namespace ftevolve

#endif  // FTEVOLVE_LIBRARY_H_
