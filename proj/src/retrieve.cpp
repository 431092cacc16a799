#include "lexkit/retrieve.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include "lexkit/errors.hpp"
#include "lexkit/jsonl.hpp"
#include "lexkit/text.hpp"

namespace lexkit::retrieve {

std::vector<Chunk> chunk_text(const std::string& text_in, int max_chunk_tokens) {
  if (max_chunk_tokens < 1) throw Error("max_chunk_tokens must be >= 1");
  const auto spans = text::token_spans(text_in);
  if (spans.empty()) throw EmptyText("cannot chunk empty text");

  std::vector<Chunk> chunks;
  const std::size_t step = std::size_t(max_chunk_tokens);
  for (std::size_t begin = 0; begin < spans.size(); begin += step) {
    const std::size_t end = std::min(begin + step, spans.size());
    Chunk chunk;
    chunk.index = int(chunks.size());
    chunk.token_begin = begin;
    chunk.token_end = end;
    chunk.text = text_in.substr(spans[begin].begin, spans[end - 1].end - spans[begin].begin);
    chunks.push_back(std::move(chunk));
  }
  return chunks;
}

std::vector<ChunkMatch> match_elements(const std::vector<Chunk>& chunks,
                                       const elements::ElementCatalog& catalog,
                                       clients::TextEmbedder& embedder, bool use_augmented,
                                       int top_k) {
  if (catalog.size() == 0) throw Error("catalog must be non-empty");
  if (top_k < 1) throw Error("top_k must be >= 1");

  std::vector<clients::EmbeddingVector> element_vecs;
  element_vecs.reserve(catalog.size());
  for (const auto& def : catalog.elements()) {
    const std::string& desc = use_augmented && def.augmented_description
                                  ? *def.augmented_description
                                  : def.description;
    element_vecs.push_back(embedder.embed(desc));
  }

  std::vector<ChunkMatch> matches;
  for (const auto& chunk : chunks) {
    const auto chunk_vec = embedder.embed(chunk.text);
    std::vector<std::pair<double, std::size_t>> scored;  // (cosine, catalog index)
    scored.reserve(element_vecs.size());
    for (std::size_t e = 0; e < element_vecs.size(); ++e)
      scored.emplace_back(clients::cosine(chunk_vec, element_vecs[e]), e);
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      return a.first > b.first;  // stable keeps lower catalog index on ties
    });
    const std::size_t take = std::min(std::size_t(top_k), scored.size());
    for (std::size_t k = 0; k < take; ++k)
      matches.push_back(
          {chunk.index, catalog.elements()[scored[k].second].name, scored[k].first});
  }
  return matches;
}

RetrievalContext build_context(const std::string& document,
                               const std::vector<ChunkMatch>& matches) {
  RetrievalContext context;
  context.document = document;
  for (const auto& match : matches) {
    if (std::find(context.matched_elements.begin(), context.matched_elements.end(),
                  match.element_name) == context.matched_elements.end())
      context.matched_elements.push_back(match.element_name);
  }
  return context;
}

std::string render_instruction(const RetrievalContext& context,
                               const elements::ElementCatalog& catalog) {
  std::ostringstream out;
  out << "请从下面的法律文书中抽取以下法律要素，并逐项给出取值：\n";
  if (context.matched_elements.empty()) {
    for (const auto& def : catalog.elements()) out << "- " << def.name << '\n';
  } else {
    for (const auto& name : context.matched_elements) out << "- " << name << '\n';
  }
  out << "文书内容：\n" << context.document << '\n';
  return out.str();
}

double overlap_accuracy(const std::set<std::string>& true_elements,
                        const std::set<std::string>& retrieved) {
  if (true_elements.empty()) throw EmptyTruth("overlap accuracy needs non-empty truth");
  std::size_t hit = 0;
  for (const auto& name : true_elements)
    if (retrieved.count(name)) ++hit;
  return double(hit) / double(true_elements.size());
}

std::vector<LabeledDoc> load_labeled_docs(const std::string& path) {
  std::vector<LabeledDoc> docs;
  for (const auto& row : read_jsonl(path)) {
    LabeledDoc doc;
    doc.id = row.at("id").get<std::string>();
    doc.text = row.at("text").get<std::string>();
    doc.true_elements = row.at("true_elements").get<std::vector<std::string>>();
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::string AugmentationComparison::to_csv() const {
  std::ostringstream out;
  out << "doc_id,overlap_original,overlap_augmented\n";
  char buf[64];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f", row.original, row.augmented);
    out << row.doc_id << ',' << buf << '\n';
  }
  std::snprintf(buf, sizeof(buf), "%.6f,%.6f", mean_original, mean_augmented);
  out << "mean," << buf << '\n';
  return out.str();
}

AugmentationComparison compare_augmentation(const std::vector<LabeledDoc>& dataset,
                                            const elements::ElementCatalog& catalog,
                                            clients::TextEmbedder& embedder,
                                            int max_chunk_tokens) {
  if (!catalog.fully_augmented())
    throw MissingAugmentedDescriptions("catalog lacks augmented descriptions");

  AugmentationComparison report;
  for (const auto& doc : dataset) {
    const auto chunks = chunk_text(doc.text, max_chunk_tokens);
    const std::set<std::string> truth(doc.true_elements.begin(), doc.true_elements.end());

    auto retrieved_set = [&](bool use_augmented) {
      std::set<std::string> out;
      for (const auto& m : match_elements(chunks, catalog, embedder, use_augmented))
        out.insert(m.element_name);
      return out;
    };

    AugmentationComparison::Row row;
    row.doc_id = doc.id;
    row.original = overlap_accuracy(truth, retrieved_set(false));
    row.augmented = overlap_accuracy(truth, retrieved_set(true));
    report.mean_original += row.original;
    report.mean_augmented += row.augmented;
    report.rows.push_back(std::move(row));
  }
  if (!report.rows.empty()) {
    report.mean_original /= double(report.rows.size());
    report.mean_augmented /= double(report.rows.size());
  }
  return report;
}

}  // namespace lexkit::retrieve
