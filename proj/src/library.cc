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

#include "ftevolve/library.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <unistd.h>

#include "json.hpp"

namespace ftevolve {
namespace {

using json = nlohmann::json;

std::set<std::string> CombinationSet(const Experience& e) {
  std::set<std::string> out;
  for (const Combination& c : e.sequence.combinations) out.insert(RenderCombination(c));
  return out;
}

std::string Hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

template <typename Get>
double EntropyImpl(std::size_t n, Get get) {
  if (n == 0) throw Error(ErrorCode::kEmptySelection, "entropy of an empty selection");
  std::map<PatternSignature, int> counts;
  for (std::size_t i = 0; i < n; ++i) ++counts[SignatureOf(get(i))];
  double h = 0.0;
  for (const auto& [sig, count] : counts) {
    const double p = static_cast<double>(count) / static_cast<double>(n);
    h -= p * std::log(p);
  }
  return h;
}

template <typename Get>
double RedundancyImpl(std::size_t n, Get get) {
  if (n == 0) throw Error(ErrorCode::kEmptySelection, "redundancy of an empty selection");
  if (n == 1) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) total += Similarity(get(i), get(j));
    }
  }
  return total / static_cast<double>(n * (n - 1));
}

json SignatureToJson(const DatasetSignature& s) {
  return json{{"name", s.name},
              {"rows", s.rows},
              {"features", s.features},
              {"task", std::string(TaskName(s.task))},
              {"columns_hash", s.columns_hash}};
}

}  // namespace

std::uint64_t Fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

DatasetSignature SignatureOfDataset(const Dataset& dataset) {
  std::string joined;
  for (const Column& c : dataset.columns()) {
    joined += c.name;
    joined += '\x1f';
  }
  return {dataset.name(), dataset.rows(), dataset.feature_count(), dataset.task(),
          Hex64(Fnv1a64(joined))};
}

std::string_view OriginName(Origin origin) {
  switch (origin) {
    case Origin::kRl: return "rl";
    case Origin::kLlm: return "llm";
    case Origin::kEnhancement: return "enhancement";
  }
  return "?";
}

Origin ParseOrigin(std::string_view text) {
  if (text == "rl") return Origin::kRl;
  if (text == "llm") return Origin::kLlm;
  if (text == "enhancement") return Origin::kEnhancement;
  throw Error(ErrorCode::kInvalidArgument, "unknown origin '" + std::string(text) + "'");
}

bool Experience::verified() const { return std::isfinite(score.value); }

PatternSignature SignatureOf(const Experience& experience) {
  std::map<std::string, int> counts;
  for (const Combination& c : experience.sequence.combinations) {
    for (const Token& t : c.tokens) {
      if (t.is_operator()) ++counts[DescriptorOf(t.op).name];
    }
  }
  PatternSignature out;
  for (const auto& [name, count] : counts) out.emplace_back(name, std::min(count, 3));
  return out;
}

double Similarity(const Experience& a, const Experience& b) {
  const std::set<std::string> sa = CombinationSet(a);
  const std::set<std::string> sb = CombinationSet(b);
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t inter = 0;
  for (const std::string& s : sa) inter += sb.count(s);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double Entropy(std::span<const Experience> selection) {
  return EntropyImpl(selection.size(),
                     [&](std::size_t i) -> const Experience& { return selection[i]; });
}

double Entropy(std::span<const Experience* const> selection) {
  return EntropyImpl(selection.size(),
                     [&](std::size_t i) -> const Experience& { return *selection[i]; });
}

double Redundancy(std::span<const Experience> selection) {
  return RedundancyImpl(selection.size(),
                        [&](std::size_t i) -> const Experience& { return selection[i]; });
}

double Redundancy(std::span<const Experience* const> selection) {
  return RedundancyImpl(selection.size(),
                        [&](std::size_t i) -> const Experience& { return *selection[i]; });
}

double SelectionObjective(std::span<const Experience* const> selection,
                          double lambda, double mu) {
  if (selection.empty()) {
    throw Error(ErrorCode::kEmptySelection, "objective of an empty selection");
  }
  double quality = 0.0;
  for (const Experience* e : selection) quality += e->score.value;
  quality /= static_cast<double>(selection.size());
  return quality + lambda * Entropy(selection) - mu * Redundancy(selection);
}

std::vector<std::size_t> ExperienceLibrary::IndicesFor(
    const DatasetSignature& dataset) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < experiences_.size(); ++i) {
    if (experiences_[i].dataset == dataset) out.push_back(i);
  }
  return out;
}

std::optional<double> ExperienceLibrary::BestScore(const DatasetSignature& dataset) const {
  std::optional<double> best;
  for (const Experience& e : experiences_) {
    if (e.dataset == dataset && (!best || e.score.value > *best)) best = e.score.value;
  }
  return best;
}

std::vector<std::size_t> ExperienceLibrary::SelectContext(
    const DatasetSignature& dataset, const SelectionParams& params) const {
  const std::vector<std::size_t> candidates = IndicesFor(dataset);
  return SelectFrom(candidates, params);
}

std::vector<std::size_t> ExperienceLibrary::SelectFrom(
    std::span<const std::size_t> candidates, const SelectionParams& params) const {
  if (params.k < 1) {
    throw Error(ErrorCode::kInvalidArgument, "context size must be at least 1");
  }
  if (params.lambda < 0.0 || params.mu < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "lambda and mu must be non-negative");
  }
  if (candidates.size() < static_cast<std::size_t>(params.k)) {
    throw Error(ErrorCode::kInsufficientExperiences,
                "need " + std::to_string(params.k) + " experiences, library has " +
                    std::to_string(candidates.size()));
  }
  std::vector<std::size_t> chosen;
  std::vector<const Experience*> selection;
  std::vector<bool> used(candidates.size(), false);
  while (chosen.size() < static_cast<std::size_t>(params.k)) {
    std::size_t best = candidates.size();
    double best_j = 0.0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (used[c]) continue;
      const Experience& e = experiences_[candidates[c]];
      selection.push_back(&e);
      const double j = SelectionObjective(selection, params.lambda, params.mu);
      selection.pop_back();
      bool better = best == candidates.size() || j > best_j;
      if (!better && j == best_j) {
        const Experience& incumbent = experiences_[candidates[best]];
        better = e.score.value > incumbent.score.value ||
                 (e.score.value == incumbent.score.value &&
                  candidates[c] < candidates[best]);
      }
      if (better) {
        best = c;
        best_j = j;
      }
    }
    used[best] = true;
    chosen.push_back(candidates[best]);
    selection.push_back(&experiences_[candidates[best]]);
  }
  return chosen;
}

WriteBackResult ExperienceLibrary::WriteBack(std::span<const Experience> incoming,
                                             double dedup_threshold) {
  for (const Experience& e : incoming) {
    if (!e.verified()) {
      throw Error(ErrorCode::kUnverifiedExperience,
                  "experience '" + RenderSequence(e.sequence) + "' has no score");
    }
  }
  WriteBackResult result;
  for (std::size_t pos = 0; pos < incoming.size(); ++pos) {
    const Experience& e = incoming[pos];
    const std::string rendering = RenderSequence(e.sequence);
    bool drop = false;
    for (const Experience& existing : experiences_) {
      if (!(existing.dataset == e.dataset)) continue;
      if (RenderSequence(existing.sequence) == rendering) {
        ++result.dropped_duplicate;
        drop = true;
        break;
      }
      if (Similarity(existing, e) > dedup_threshold &&
          e.score.value <= existing.score.value) {
        ++result.dropped_near_duplicate;
        drop = true;
        break;
      }
    }
    if (!drop) {
      experiences_.push_back(e);
      ++result.added;
      result.accepted.push_back(pos);
    }
  }
  ++version_;
  return result;
}

std::size_t ExperienceLibrary::Remove(std::span<const std::size_t> indices) {
  std::vector<bool> gone(experiences_.size(), false);
  for (std::size_t i : indices) {
    if (i < gone.size()) gone[i] = true;
  }
  std::vector<Experience> kept;
  kept.reserve(experiences_.size());
  for (std::size_t i = 0; i < experiences_.size(); ++i) {
    if (!gone[i]) kept.push_back(std::move(experiences_[i]));
  }
  const std::size_t removed = experiences_.size() - kept.size();
  experiences_ = std::move(kept);
  if (removed > 0) ++version_;
  return removed;
}

std::string ExperienceLibrary::ToJson() const {
  json doc;
  doc["version"] = version_;
  json list = json::array();
  for (const Experience& e : experiences_) {
    list.push_back(json{{"dataset", SignatureToJson(e.dataset)},
                        {"sequence", RenderSequence(e.sequence)},
                        {"score",
                         {{"metric", std::string(MetricName(e.score.metric))},
                          {"value", e.score.value}}},
                        {"origin", std::string(OriginName(e.origin))},
                        {"iteration", e.iteration}});
  }
  doc["experiences"] = std::move(list);
  return doc.dump(2) + "\n";
}

ExperienceLibrary ExperienceLibrary::FromJson(std::string_view text) {
  ExperienceLibrary lib;
  try {
    const json doc = json::parse(text);
    lib.version_ = doc.at("version").get<std::int64_t>();
    // Stored sequences were verified under their own limits.
    const SequenceLimits loose{1 << 20, 1 << 20};
    const OperatorSet ops = OperatorSet::Default();
    for (const json& item : doc.at("experiences")) {
      Experience e;
      const json& ds = item.at("dataset");
      e.dataset.name = ds.at("name").get<std::string>();
      e.dataset.rows = ds.at("rows").get<int>();
      e.dataset.features = ds.at("features").get<int>();
      e.dataset.task = ParseTask(ds.at("task").get<std::string>());
      e.dataset.columns_hash = ds.at("columns_hash").get<std::string>();
      e.sequence = ParseSequence(item.at("sequence").get<std::string>(), ops,
                                 e.dataset.features, loose);
      e.score.metric = ParseMetric(item.at("score").at("metric").get<std::string>());
      e.score.value = item.at("score").at("value").get<double>();
      e.origin = ParseOrigin(item.at("origin").get<std::string>());
      e.iteration = item.at("iteration").get<int>();
      lib.experiences_.push_back(std::move(e));
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kMalformedLibrary, ex.what());
  } catch (const Error& ex) {
    throw Error(ErrorCode::kMalformedLibrary, ex.what());
  }
  return lib;
}

ExperienceLibrary ExperienceLibrary::Load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return FromJson(buf.str());
}

void ExperienceLibrary::Save(const std::filesystem::path& path) const {
  std::filesystem::path tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + tmp.string() + "'");
    out << ToJson();
    if (!out.flush()) {
      throw Error(ErrorCode::kIoError, "short write to '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(ErrorCode::kIoError,
                "cannot rename onto '" + path.string() + "': " + ec.message());
  }
}

std::uint64_t ExperienceLibrary::ContentHash() const { return Fnv1a64(ToJson()); }

}  // namespace ftevolve
