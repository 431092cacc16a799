#include "lexkit/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include "lexkit/errors.hpp"
#include "lexkit/jsonl.hpp"
#include "lexkit/text.hpp"

namespace lexkit::metrics {

namespace {

double f1_of(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

std::unordered_map<std::string, int> ngram_counts(const std::vector<std::string>& tokens,
                                                  std::size_t n) {
  std::unordered_map<std::string, int> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < n; ++k) {
      key += tokens[i + k];
      key.push_back('\x1f');
    }
    ++counts[key];
  }
  return counts;
}

RougeScore rouge_n(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
                   std::size_t n) {
  const auto cand_counts = ngram_counts(cand, n);
  const auto ref_counts = ngram_counts(ref, n);
  long cand_total = 0, ref_total = 0, overlap = 0;
  for (const auto& [g, c] : cand_counts) cand_total += c;
  for (const auto& [g, c] : ref_counts) ref_total += c;
  for (const auto& [g, c] : cand_counts) {
    auto it = ref_counts.find(g);
    if (it != ref_counts.end()) overlap += std::min(c, it->second);
  }
  RougeScore score;
  score.recall = ref_total > 0 ? double(overlap) / double(ref_total) : 0.0;
  score.precision = cand_total > 0 ? double(overlap) / double(cand_total) : 0.0;
  score.f1 = f1_of(score.precision, score.recall);
  return score;
}

}  // namespace

RougeTriple rouge(const std::string& candidate, const std::string& reference) {
  const auto cand = text::tokenize(candidate);
  const auto ref = text::tokenize(reference);
  if (cand.empty() || ref.empty())
    throw EmptyAfterTokenization("rouge requires non-empty token sequences");

  RougeTriple triple;
  triple.r1 = rouge_n(cand, ref, 1);
  triple.r2 = rouge_n(cand, ref, 2);
  const double lcs = double(text::lcs_length(cand, ref));
  triple.rl.recall = lcs / double(ref.size());
  triple.rl.precision = lcs / double(cand.size());
  triple.rl.f1 = f1_of(triple.rl.precision, triple.rl.recall);
  return triple;
}

RougeScore embed_score(const std::string& candidate, const std::string& reference,
                       clients::TextEmbedder& embedder) {
  const auto cand = text::tokenize(candidate);
  const auto ref = text::tokenize(reference);
  if (cand.empty() || ref.empty())
    throw EmptyAfterTokenization("embed_score requires non-empty token sequences");

  std::unordered_map<std::string, clients::EmbeddingVector> cache;
  auto vec_for = [&](const std::string& tok) -> const clients::EmbeddingVector& {
    auto it = cache.find(tok);
    if (it == cache.end()) it = cache.emplace(tok, embedder.embed(tok)).first;
    return it->second;
  };

  auto greedy_mean = [&](const std::vector<std::string>& from,
                         const std::vector<std::string>& against) {
    double sum = 0.0;
    for (const auto& ft : from) {
      double best = -1.0;
      for (const auto& at : against) best = std::max(best, clients::cosine(vec_for(ft), vec_for(at)));
      sum += best;
    }
    return sum / double(from.size());
  };

  RougeScore score;
  score.recall = greedy_mean(ref, cand);
  score.precision = greedy_mean(cand, ref);
  score.f1 = f1_of(score.precision, score.recall);
  return score;
}

ExtractionCounts extraction_counts(const SlotMap& gold, const SlotMap& pred) {
  ExtractionCounts counts;
  counts.gold_slots = int(gold.size());
  for (const auto& [name, value] : gold) {
    auto it = pred.find(name);
    if (it != pred.end() && it->second == value) {
      ++counts.tp;
      ++counts.correct;
    } else {
      ++counts.fn;  // missing or value-mismatched
    }
  }
  for (const auto& [name, value] : pred) {
    auto it = gold.find(name);
    if (it == gold.end() || it->second != value) ++counts.fp;
  }
  return counts;
}

namespace {

ExtractionScore score_from(int tp, int fp, int fn, double accuracy) {
  ExtractionScore s;
  s.accuracy = accuracy;
  s.precision = tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0;
  s.recall = tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0;
  s.f1 = f1_of(s.precision, s.recall);
  return s;
}

}  // namespace

ExtractionScore extraction_score(const SlotMap& gold, const SlotMap& pred) {
  const auto counts = extraction_counts(gold, pred);
  return score_from(counts.tp, counts.fp, counts.fn, counts.doc_accuracy());
}

std::vector<ExtractionScore> aggregate_by_group(const std::vector<ExtractionCounts>& per_doc,
                                                const std::vector<std::string>& labels) {
  if (per_doc.size() != labels.size())
    throw UnknownGroupLabel("every document needs a group label");
  struct GroupAcc {
    int tp = 0, fp = 0, fn = 0;
    double accuracy_sum = 0.0;
    int docs = 0;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, GroupAcc> groups;
  for (std::size_t i = 0; i < per_doc.size(); ++i) {
    if (labels[i].empty()) throw UnknownGroupLabel("empty group label at row " + std::to_string(i));
    auto [it, inserted] = groups.try_emplace(labels[i]);
    if (inserted) order.push_back(labels[i]);
    it->second.tp += per_doc[i].tp;
    it->second.fp += per_doc[i].fp;
    it->second.fn += per_doc[i].fn;
    it->second.accuracy_sum += per_doc[i].doc_accuracy();
    ++it->second.docs;
  }

  std::vector<ExtractionScore> rows;
  ExtractionScore avg;
  avg.group = "Average";
  for (const auto& label : order) {
    const auto& g = groups.at(label);
    auto row = score_from(g.tp, g.fp, g.fn, g.accuracy_sum / double(g.docs));
    row.group = label;
    avg.accuracy += row.accuracy;
    avg.recall += row.recall;
    avg.precision += row.precision;
    avg.f1 += row.f1;
    rows.push_back(row);
  }
  if (!order.empty()) {
    avg.accuracy /= double(order.size());
    avg.recall /= double(order.size());
    avg.precision /= double(order.size());
    avg.f1 /= double(order.size());
  }
  rows.push_back(avg);
  return rows;
}

std::string report_csv(const std::vector<ExtractionScore>& rows) {
  std::ostringstream out;
  out << "group,accuracy,recall,precision,f1\n";
  char buf[128];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.1f,%.1f,%.1f,%.1f", row.accuracy * 100.0,
                  row.recall * 100.0, row.precision * 100.0, row.f1 * 100.0);
    out << row.group << ',' << buf << '\n';
  }
  return out.str();
}

std::string report_json(const std::vector<ExtractionScore>& rows) {
  Json arr = Json::array();
  for (const auto& row : rows) {
    Json j;
    j["group"] = row.group;
    j["accuracy"] = row.accuracy;
    j["recall"] = row.recall;
    j["precision"] = row.precision;
    j["f1"] = row.f1;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

}  // namespace lexkit::metrics
