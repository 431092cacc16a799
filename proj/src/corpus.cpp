#include "lexkit/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "lexkit/errors.hpp"
#include "lexkit/text.hpp"

namespace lexkit::corpus {

DocType doc_type_from_string(const std::string& s) {
  if (s == "judgment" || s == "判决书") return DocType::judgment;
  if (s == "ruling" || s == "裁定书") return DocType::ruling;
  return DocType::other;
}

std::string to_string(DocType t) {
  switch (t) {
    case DocType::judgment: return "judgment";
    case DocType::ruling: return "ruling";
    case DocType::other: return "other";
  }
  return "other";
}

AnchorSet AnchorSet::defaults() {
  return AnchorSet{{"本院查明", "本院认为", "判决如下", "裁判结果", "审理查明"}};
}

AnchorSet AnchorSet::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open anchors file: " + path);
  AnchorSet set;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) set.anchors.push_back(line);
  }
  if (set.anchors.empty()) throw Error("anchors file is empty: " + path);
  return set;
}

SectionMap extract_sections(const RawDocument& doc, const AnchorSet& anchors) {
  if (doc.body.empty()) throw Error("document body is empty: " + doc.id);
  const std::string body = text::normalize(doc.body);

  // First occurrence of each anchor; later occurrences are plain text.
  struct Hit {
    std::size_t pos;
    std::size_t anchor_idx;
  };
  std::vector<Hit> hits;
  for (std::size_t i = 0; i < anchors.anchors.size(); ++i) {
    const auto pos = body.find(anchors.anchors[i]);
    if (pos != std::string::npos) hits.push_back({pos, i});
  }
  if (hits.empty()) throw NoAnchorsFound("no anchor present in document " + doc.id);
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.pos != b.pos ? a.pos < b.pos : a.anchor_idx < b.anchor_idx;
  });

  SectionMap sections;
  for (std::size_t k = 0; k < hits.size(); ++k) {
    const auto& anchor = anchors.anchors[hits[k].anchor_idx];
    const std::size_t begin = hits[k].pos + anchor.size();
    const std::size_t end = k + 1 < hits.size() ? hits[k + 1].pos : body.size();
    sections.emplace_back(anchor, body.substr(begin, end - begin));
  }
  return sections;
}

std::string to_string(DropReason r) {
  switch (r) {
    case DropReason::kept: return "kept";
    case DropReason::ruling_excluded: return "ruling_excluded";
    case DropReason::other_type_excluded: return "other_type_excluded";
    case DropReason::too_old: return "too_old";
  }
  return "kept";
}

FilterDecision filter_document(const RawDocument& doc, int min_year) {
  if (doc.doc_type == DocType::ruling) return {false, DropReason::ruling_excluded};
  if (doc.doc_type == DocType::other) return {false, DropReason::other_type_excluded};
  if (doc.year < min_year) return {false, DropReason::too_old};
  return {true, DropReason::kept};
}

Json DocRecord::to_json() const {
  Json j;
  j["index"] = index;
  j["doc_type"] = doc_type;
  j["procedure"] = procedure;
  Json f = Json::object();
  for (const auto& [k, v] : features) f[k] = v;
  j["features"] = std::move(f);
  Json s = Json::object();
  for (const auto& [k, v] : sections) s[k] = v;
  j["sections"] = std::move(s);
  return j;
}

DocRecord DocRecord::from_json(const Json& j) {
  DocRecord r;
  r.index = j.at("index").get<std::string>();
  r.doc_type = j.at("doc_type").get<std::string>();
  r.procedure = j.value("procedure", "");
  for (const auto& [k, v] : j.at("features").items()) r.features.emplace_back(k, v.get<std::string>());
  for (const auto& [k, v] : j.at("sections").items()) r.sections.emplace_back(k, v.get<std::string>());
  return r;
}

DocRecord build_record(const RawDocument& doc, const SectionMap& sections,
                       const std::vector<std::pair<std::string, std::string>>& features,
                       const elements::ElementCatalog& catalog) {
  for (const auto& [name, value] : features) {
    (void)value;
    if (!catalog.contains(name)) throw UnknownElementKey("unknown element key: " + name);
  }
  DocRecord r;
  r.index = doc.id;
  r.doc_type = to_string(doc.doc_type);
  r.procedure = doc.procedure;
  r.features = features;
  r.sections = sections;
  return r;
}

BuildStats build_corpus(const std::string& in_dir, const std::string& meta_path,
                        const std::string& out_path, int min_year, const AnchorSet& anchors,
                        const elements::ElementCatalog& catalog) {
  BuildStats stats;
  std::vector<Json> out_rows;
  for (const auto& meta : read_jsonl(meta_path)) {
    RawDocument doc;
    doc.id = meta.at("id").get<std::string>();
    doc.doc_type = doc_type_from_string(meta.at("doc_type").get<std::string>());
    doc.year = meta.at("year").get<int>();
    doc.province = meta.value("province", "");
    doc.crime_type = meta.value("crime_type", "");
    doc.procedure = meta.value("procedure", "");

    const auto body_path = std::filesystem::path(in_dir) / (doc.id + ".txt");
    doc.body = read_file(body_path.string());
    ++stats.read;

    if (!filter_document(doc, min_year).keep) {
      ++stats.dropped_filter;
      continue;
    }
    SectionMap sections;
    try {
      sections = extract_sections(doc, anchors);
    } catch (const NoAnchorsFound&) {
      ++stats.dropped_no_anchors;
      continue;
    }
    std::vector<std::pair<std::string, std::string>> features;
    if (meta.contains("features"))
      for (const auto& [k, v] : meta["features"].items())
        features.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
    out_rows.push_back(build_record(doc, sections, features, catalog).to_json());
    ++stats.kept;
  }
  write_jsonl(out_path, out_rows);
  return stats;
}

}  // namespace lexkit::corpus
