#pragma once

#include <map>
#include <string>
#include <vector>

#include "lexkit/clients.hpp"

namespace lexkit::metrics {

struct RougeScore {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
};

struct RougeTriple {
  RougeScore r1;
  RougeScore r2;
  RougeScore rl;
};

// ROUGE-1/2 via clipped n-gram overlap, ROUGE-L via longest common
// subsequence. Recall normalizes by the reference, precision by the candidate.
// Throws EmptyAfterTokenization.
RougeTriple rouge(const std::string& candidate, const std::string& reference);

// Greedy token-level embedding match: recall is the mean over reference tokens
// of the best cosine against candidate tokens, precision symmetric.
RougeScore embed_score(const std::string& candidate, const std::string& reference,
                       clients::TextEmbedder& embedder);

using SlotMap = std::map<std::string, std::string>;  // element name -> canonical value

struct ExtractionCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int gold_slots = 0;
  int correct = 0;  // gold slots predicted exactly right

  double doc_accuracy() const { return gold_slots > 0 ? double(correct) / gold_slots : 0.0; }
};

ExtractionCounts extraction_counts(const SlotMap& gold, const SlotMap& pred);

struct ExtractionScore {
  double accuracy = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  std::string group;
};

// Single-document score: micro precision/recall/f1 from the counts, accuracy =
// fraction of gold slots exactly correct. Zero denominators score 0.
ExtractionScore extraction_score(const SlotMap& gold, const SlotMap& pred);

// Micro-aggregates counts within each group label (first-appearance order) and
// appends an unweighted-mean "Average" row. Group accuracy is the mean of the
// per-document accuracies. Throws UnknownGroupLabel for empty or missing labels.
std::vector<ExtractionScore> aggregate_by_group(const std::vector<ExtractionCounts>& per_doc,
                                                const std::vector<std::string>& labels);

// CSV with scores x100 at one decimal, matching the report presentation.
std::string report_csv(const std::vector<ExtractionScore>& rows);
// Full-precision JSON variant.
std::string report_json(const std::vector<ExtractionScore>& rows);

}  // namespace lexkit::metrics
