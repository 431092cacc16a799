#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lexkit/elements.hpp"
#include "lexkit/jsonl.hpp"

namespace lexkit::corpus {

enum class DocType { judgment, ruling, other };

DocType doc_type_from_string(const std::string& s);
std::string to_string(DocType t);

struct RawDocument {
  std::string id;
  std::string body;  // full document text, UTF-8
  DocType doc_type = DocType::other;
  int year = 0;
  std::string province;
  std::string crime_type;
  std::string procedure;  // optional sidecar field; empty when absent
};

struct AnchorSet {
  std::vector<std::string> anchors;

  static AnchorSet defaults();
  static AnchorSet from_file(const std::string& path);  // one phrase per line
};

// Section spans keyed by anchor phrase, in document order.
using SectionMap = std::vector<std::pair<std::string, std::string>>;

struct DocRecord {
  std::string index;
  std::string doc_type;
  std::string procedure;
  std::vector<std::pair<std::string, std::string>> features;  // element name -> raw value
  SectionMap sections;

  Json to_json() const;
  static DocRecord from_json(const Json& j);
};

// Slices the body at the first occurrence of each anchor. A span runs from the
// end of its anchor phrase to the first occurrence of the next anchor (or end
// of body); repeated occurrences of an already-started anchor are plain text.
// Matching happens on normalized text (see text::normalize).
// Throws NoAnchorsFound when no anchor occurs.
SectionMap extract_sections(const RawDocument& doc, const AnchorSet& anchors);

enum class DropReason { kept, ruling_excluded, other_type_excluded, too_old };

struct FilterDecision {
  bool keep = false;
  DropReason reason = DropReason::kept;
};

std::string to_string(DropReason r);

// Keeps judgments from min_year onward; everything else is dropped with a reason.
FilterDecision filter_document(const RawDocument& doc, int min_year);

// Assembles the structured record. Feature keys are validated against the
// catalog; unknown keys raise UnknownElementKey.
DocRecord build_record(const RawDocument& doc, const SectionMap& sections,
                       const std::vector<std::pair<std::string, std::string>>& features,
                       const elements::ElementCatalog& catalog);

struct BuildStats {
  std::size_t read = 0;
  std::size_t kept = 0;
  std::size_t dropped_filter = 0;
  std::size_t dropped_no_anchors = 0;
};

// Directory of <id>.txt files plus a JSONL metadata sidecar -> records JSONL.
BuildStats build_corpus(const std::string& in_dir, const std::string& meta_path,
                        const std::string& out_path, int min_year, const AnchorSet& anchors,
                        const elements::ElementCatalog& catalog);

}  // namespace lexkit::corpus
