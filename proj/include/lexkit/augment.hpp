#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lexkit/clients.hpp"

namespace lexkit::augment {

struct QAPair {
  std::string input;
  std::string output;
  std::optional<std::string> source_article;
};

struct AugmentJob {
  std::string legal_text;
  int num_qa = 1;
  std::string template_id = "qa_generation";
};

// Named prompt templates with {placeholder} slots.
class TemplateCatalog {
 public:
  static TemplateCatalog builtin();  // ships the QA data-generation template
  static TemplateCatalog from_file(const std::string& path);

  const std::string* find(const std::string& id) const;
  void add(const std::string& id, const std::string& text);

 private:
  std::map<std::string, std::string> templates_;
};

// Substitutes {prompt} <- legal_text and {num_qa} <- num_qa. Throws
// UnknownTemplate / UnresolvedPlaceholder.
std::string render_prompt(const AugmentJob& job, const TemplateCatalog& catalog);

struct ParseDiagnostics {
  bool count_mismatch = false;
  int expected = 0;
  int got = 0;
  int dropped_malformed = 0;
  int dropped_empty_field = 0;
  int dropped_duplicate = 0;
};

struct ParseResult {
  std::vector<QAPair> pairs;
  ParseDiagnostics diagnostics;
};

// Recovers the first balanced JSON array of {input, output} objects from a
// possibly prose-wrapped response. Throws NoParsableArray when none exists.
ParseResult parse_qa(const std::string& response, int expected);

struct RunStats {
  std::size_t jobs = 0;
  std::size_t pairs = 0;
  std::size_t count_mismatches = 0;
};

// Renders each article's prompt, calls the generator, parses QA pairs, and
// writes {input, output, source_article} JSONL.
// Articles file: JSONL rows with {id, text}.
RunStats run_augment(const std::string& laws_path, int num_qa, const TemplateCatalog& templates,
                     const std::string& template_id, clients::TextGenerator& generator,
                     const std::string& out_path);

}  // namespace lexkit::augment
