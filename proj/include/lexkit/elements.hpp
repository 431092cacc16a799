#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "lexkit/jsonl.hpp"

namespace lexkit::elements {

enum class ElementKind { flag, count, duration_months, amount, text };

ElementKind kind_from_string(const std::string& s);
std::string to_string(ElementKind k);

struct ElementDef {
  std::string name;  // canonical, e.g. 有期徒刑
  ElementKind kind = ElementKind::text;
  std::string description;
  std::optional<std::string> augmented_description;
};

class ElementCatalog {
 public:
  ElementCatalog() = default;
  explicit ElementCatalog(std::vector<ElementDef> defs);

  const std::vector<ElementDef>& elements() const { return elements_; }
  const ElementDef* find(const std::string& name) const;
  bool contains(const std::string& name) const { return find(name) != nullptr; }
  std::size_t size() const { return elements_.size(); }

  // True when every element carries a non-empty augmented description.
  bool fully_augmented() const;

  static ElementCatalog from_jsonl(const std::string& path);
  void to_jsonl(const std::string& path) const;

 private:
  std::vector<ElementDef> elements_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Typed, normalized value of one extracted element.
struct ElementValue {
  std::string name;
  // flag -> bool; count / duration_months -> int64; amount -> double; text -> string
  std::variant<bool, std::int64_t, double, std::string> value;

  bool operator==(const ElementValue& other) const = default;
};

// Parses a duration expressed in years and/or months (Chinese numerals or
// ASCII digits) into whole months: 12*years + months.
// Throws UnparseableDuration for anything else.
std::int64_t normalize_duration(const std::string& text_value);

// Parses a standalone numeral made of ASCII digits or of 〇一二三四五六七八九十百.
// Returns nothing when the token is not a well-formed numeral.
std::optional<std::int64_t> parse_numeral(const std::string& token);

// Parses a raw value string according to the element's kind. Duration kinds go
// through normalize_duration; bare numbers are taken as already in months.
ElementValue parse_value(const ElementDef& def, const std::string& raw);

// Canonical string form used for exact-match scoring.
std::string canonical_string(const ElementValue& v);

enum class ViolationKind { hallucinated_element, type_mismatch };

struct Violation {
  std::string name;
  ViolationKind kind;
};

struct ValidationResult {
  std::vector<ElementValue> validated;
  std::vector<Violation> violations;
};

// Schema check only: names must exist in the catalog and value types must
// match the declared kind. Violations are reported, not thrown.
ValidationResult validate_extraction(const std::vector<ElementValue>& pred,
                                     const ElementCatalog& catalog);

// Canonical form of a raw value string for exact-match scoring. Values that
// fail to parse (or name unknown elements) fall back to the trimmed raw text,
// which then simply never matches a well-formed gold value.
std::string canonicalize_raw(const ElementCatalog& catalog, const std::string& name,
                             const std::string& raw);

// The starter catalog shipped with the toolkit (sentence terms, injury counts,
// monetary amounts, mitigation flags), each with an augmented description.
ElementCatalog starter_catalog();

}  // namespace lexkit::elements
