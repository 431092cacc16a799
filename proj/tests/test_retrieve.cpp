#include <doctest.h>

#include "lexkit/errors.hpp"
#include "lexkit/retrieve.hpp"
#include "lexkit/rng.hpp"
#include "lexkit/text.hpp"

using namespace lexkit;
using retrieve::Chunk;

namespace {

elements::ElementCatalog tiny_catalog(bool with_augmented = true) {
  std::vector<elements::ElementDef> defs;
  const std::vector<std::pair<std::string, std::string>> entries = {
      {"甲要素", "甲要素的详细说明文本"},
      {"乙要素", "乙要素的另一种阐述"},
      {"丙要素", "丙要素所指的内容"},
  };
  for (const auto& [name, augmented] : entries) {
    elements::ElementDef def;
    def.name = name;
    def.kind = elements::ElementKind::flag;
    def.description = name;
    if (with_augmented) def.augmented_description = augmented;
    defs.push_back(std::move(def));
  }
  return elements::ElementCatalog(std::move(defs));
}

}  // namespace

TEST_CASE("chunk_text partitions by token count") {
  std::string doc;
  for (int i = 0; i < 2500; ++i) doc += text::encode_utf8(char32_t(U'一' + (i % 100)));
  const auto chunks = retrieve::chunk_text(doc, 1000);
  REQUIRE(chunks.size() == 3);
  CHECK(chunks[0].token_end - chunks[0].token_begin == 1000);
  CHECK(chunks[1].token_end - chunks[1].token_begin == 1000);
  CHECK(chunks[2].token_end - chunks[2].token_begin == 500);
}

TEST_CASE("short text is a single chunk") {
  const auto chunks = retrieve::chunk_text("短文本", 512);
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].text == "短文本");
}

TEST_CASE("re-joined chunks equal the original byte for byte") {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    std::string doc;
    const std::vector<std::string> pieces = {"本院", " hello ", "查明", "19条", "\n", "罚金"};
    for (int i = 0; i < 40; ++i) doc += pieces[rng.next_below(pieces.size())];
    for (int max_tokens : {1, 3, 7, 512}) {
      std::string rebuilt;
      for (const auto& chunk : retrieve::chunk_text(doc, max_tokens)) rebuilt += chunk.text;
      CHECK(rebuilt == doc);
    }
  }
}

TEST_CASE("chunking empty text throws") {
  CHECK_THROWS_AS(retrieve::chunk_text("", 10), EmptyText);
}

TEST_CASE("match_elements self-match scores cosine one") {
  const auto catalog = tiny_catalog();
  clients::HashingEmbedder embedder;
  std::vector<Chunk> chunks = {{0, "乙要素", 0, 3}};
  const auto matches = retrieve::match_elements(chunks, catalog, embedder, false);
  REQUIRE(matches.size() == 1);
  CHECK(matches[0].element_name == "乙要素");
  CHECK(matches[0].cosine == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("match_elements recovers every element on a planted corpus") {
  const auto catalog = tiny_catalog();
  clients::HashingEmbedder embedder;
  for (const auto& def : catalog.elements()) {
    std::vector<Chunk> chunks = {{0, def.name, 0, 1}};
    const auto matches = retrieve::match_elements(chunks, catalog, embedder, false);
    REQUIRE(matches.size() == 1);
    CHECK(matches[0].element_name == def.name);
  }
}

TEST_CASE("exact ties break to the lowest catalog index") {
  // Two catalog entries with identical descriptions tie exactly.
  std::vector<elements::ElementDef> defs;
  for (const char* name : {"元素零", "元素一", "元素二"}) {
    elements::ElementDef def;
    def.name = name;
    def.kind = elements::ElementKind::flag;
    def.description = "同样的描述";
    defs.push_back(std::move(def));
  }
  const elements::ElementCatalog catalog(std::move(defs));
  clients::HashingEmbedder embedder;
  std::vector<Chunk> chunks = {{0, "同样的描述", 0, 5}};
  const auto matches = retrieve::match_elements(chunks, catalog, embedder, false);
  REQUIRE(matches.size() == 1);
  CHECK(matches[0].element_name == "元素零");
}

TEST_CASE("cosines stay within [-1, 1]") {
  const auto catalog = tiny_catalog();
  clients::HashingEmbedder embedder;
  Rng rng(29);
  std::vector<Chunk> chunks;
  for (int i = 0; i < 20; ++i) {
    std::string s;
    for (int k = 0; k < 6; ++k) s += text::encode_utf8(char32_t(U'一' + rng.next_below(200)));
    chunks.push_back({i, s, 0, 6});
  }
  for (const auto& m : retrieve::match_elements(chunks, catalog, embedder, false, 3))
    CHECK(std::abs(m.cosine) <= 1.0 + 1e-9);
}

TEST_CASE("permuting the catalog changes results only through the tie rule") {
  auto defs = tiny_catalog().elements();
  std::vector<elements::ElementDef> reversed(defs.rbegin(), defs.rend());
  const elements::ElementCatalog forward(defs);
  const elements::ElementCatalog backward(std::move(reversed));
  clients::HashingEmbedder embedder;
  Rng rng(37);
  std::vector<Chunk> chunks;
  for (int i = 0; i < 10; ++i) {
    std::string s;
    for (int k = 0; k < 8; ++k) s += text::encode_utf8(char32_t(U'一' + rng.next_below(300)));
    chunks.push_back({i, s, 0, 8});
  }
  const auto m1 = retrieve::match_elements(chunks, forward, embedder, false);
  const auto m2 = retrieve::match_elements(chunks, backward, embedder, false);
  REQUIRE(m1.size() == m2.size());
  for (std::size_t i = 0; i < m1.size(); ++i) {
    CHECK(m1[i].cosine == m2[i].cosine);  // best score is order-independent
    // names may differ only when the best cosine is tied across elements
    double best = -2.0, second = -2.0;
    const auto chunk_vec = embedder.embed(chunks[i].text);
    for (const auto& def : forward.elements()) {
      const double c = clients::cosine(chunk_vec, embedder.embed(def.description));
      if (c > best) {
        second = best;
        best = c;
      } else if (c > second) {
        second = c;
      }
    }
    if (best > second) CHECK(m1[i].element_name == m2[i].element_name);
  }
}

TEST_CASE("build_context dedups preserving first occurrence") {
  const std::vector<retrieve::ChunkMatch> matches = {
      {0, "A", 0.9}, {1, "B", 0.8}, {2, "A", 0.7}, {3, "C", 0.6}};
  const auto context = retrieve::build_context("doc", matches);
  CHECK(context.matched_elements == std::vector<std::string>{"A", "B", "C"});
}

TEST_CASE("build_context with no matches falls back to the full catalog") {
  const auto context = retrieve::build_context("doc", {});
  CHECK(context.matched_elements.empty());
  const auto catalog = tiny_catalog();
  const auto instruction = retrieve::render_instruction(context, catalog);
  for (const auto& def : catalog.elements())
    CHECK(instruction.find(def.name) != std::string::npos);
}

TEST_CASE("overlap_accuracy worked examples") {
  const std::set<std::string> truth = {"a", "b", "c", "d", "e"};
  CHECK(retrieve::overlap_accuracy(truth, truth) == 1.0);
  CHECK(retrieve::overlap_accuracy(truth, {"a", "b", "c", "d"}) == 0.8);
  CHECK(retrieve::overlap_accuracy(truth, {"x", "y"}) == 0.0);
  CHECK_THROWS_AS(retrieve::overlap_accuracy({}, {"a"}), EmptyTruth);
}

TEST_CASE("overlap_accuracy is monotone in the retrieved set") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    std::set<std::string> truth, retrieved;
    const int n_truth = 1 + int(rng.next_below(6));
    for (int i = 0; i < n_truth; ++i) truth.insert("e" + std::to_string(rng.next_below(10)));
    const int n_ret = int(rng.next_below(6));
    for (int i = 0; i < n_ret; ++i) retrieved.insert("e" + std::to_string(rng.next_below(10)));
    const double before = retrieve::overlap_accuracy(truth, retrieved);
    auto grown = retrieved;
    grown.insert("e" + std::to_string(rng.next_below(10)));
    CHECK(retrieve::overlap_accuracy(truth, grown) >= before);
  }
}

TEST_CASE("compare_augmentation reports both variants per document") {
  const auto catalog = tiny_catalog();
  clients::HashingEmbedder embedder;
  std::vector<retrieve::LabeledDoc> docs;
  for (const auto& def : catalog.elements())
    docs.push_back({"doc-" + def.name, def.name, {def.name}});
  const auto report = retrieve::compare_augmentation(docs, catalog, embedder, 8);
  CHECK(report.rows.size() == docs.size());
  // chunks are verbatim original descriptions -> original retrieval is perfect
  CHECK(report.mean_original == 1.0);
  CHECK(report.mean_original >= report.mean_augmented);
}

TEST_CASE("compare_augmentation identical variants give identical accuracies") {
  std::vector<elements::ElementDef> defs;
  for (const char* name : {"要素甲", "要素乙"}) {
    elements::ElementDef def;
    def.name = name;
    def.kind = elements::ElementKind::flag;
    def.description = name;
    def.augmented_description = name;  // identical in both variants
    defs.push_back(std::move(def));
  }
  const elements::ElementCatalog catalog(std::move(defs));
  clients::HashingEmbedder embedder;
  const std::vector<retrieve::LabeledDoc> docs = {{"d1", "要素甲要素乙", {"要素甲"}}};
  const auto report = retrieve::compare_augmentation(docs, catalog, embedder, 3);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].original == report.rows[0].augmented);
}

TEST_CASE("compare_augmentation requires augmented descriptions") {
  const auto catalog = tiny_catalog(false);
  clients::HashingEmbedder embedder;
  const std::vector<retrieve::LabeledDoc> docs = {{"d1", "文本", {"甲要素"}}};
  CHECK_THROWS_AS(retrieve::compare_augmentation(docs, catalog, embedder, 8),
                  MissingAugmentedDescriptions);
}
