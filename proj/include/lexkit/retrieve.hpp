#pragma once

#include <set>
#include <string>
#include <vector>

#include "lexkit/clients.hpp"
#include "lexkit/elements.hpp"

namespace lexkit::retrieve {

struct Chunk {
  int index = 0;
  std::string text;
  std::size_t token_begin = 0;  // [token_begin, token_end) in token indices
  std::size_t token_end = 0;
};

// Greedy fixed-size partition by token count (one token per CJK character,
// whitespace-delimited words otherwise). Chunk texts concatenate back to the
// input byte-for-byte. Throws EmptyText.
std::vector<Chunk> chunk_text(const std::string& text, int max_chunk_tokens);

struct ChunkMatch {
  int chunk_index = 0;
  std::string element_name;
  double cosine = 0.0;
};

// For each chunk, the catalog elements with the highest cosine similarity
// between the chunk embedding and the element-description embedding
// (augmented description when use_augmented and present). Ties break to the
// lowest catalog index. top_k > 1 returns the k best per chunk.
std::vector<ChunkMatch> match_elements(const std::vector<Chunk>& chunks,
                                       const elements::ElementCatalog& catalog,
                                       clients::TextEmbedder& embedder, bool use_augmented,
                                       int top_k = 1);

struct RetrievalContext {
  std::string document;
  std::vector<std::string> matched_elements;  // deduplicated, first-occurrence order
};

RetrievalContext build_context(const std::string& document,
                               const std::vector<ChunkMatch>& matches);

// Extraction instruction listing only the matched elements; falls back to the
// full catalog when no elements were matched.
std::string render_instruction(const RetrievalContext& context,
                               const elements::ElementCatalog& catalog);

// |true ∩ retrieved| / |true|. Throws EmptyTruth.
double overlap_accuracy(const std::set<std::string>& true_elements,
                        const std::set<std::string>& retrieved);

struct LabeledDoc {
  std::string id;
  std::string text;
  std::vector<std::string> true_elements;
};

std::vector<LabeledDoc> load_labeled_docs(const std::string& path);

struct AugmentationComparison {
  struct Row {
    std::string doc_id;
    double original = 0.0;
    double augmented = 0.0;
  };
  std::vector<Row> rows;
  double mean_original = 0.0;
  double mean_augmented = 0.0;

  std::string to_csv() const;
};

// Overlap accuracy per document under original vs augmented element
// descriptions. Throws MissingAugmentedDescriptions when the catalog is not
// fully augmented.
AugmentationComparison compare_augmentation(const std::vector<LabeledDoc>& dataset,
                                            const elements::ElementCatalog& catalog,
                                            clients::TextEmbedder& embedder,
                                            int max_chunk_tokens = 512);

}  // namespace lexkit::retrieve
