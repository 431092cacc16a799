#include <doctest.h>

#include "lexkit/errors.hpp"
#include "lexkit/metrics.hpp"
#include "lexkit/rng.hpp"
#include "lexkit/text.hpp"
#include "oracles.hpp"

using namespace lexkit;
using metrics::SlotMap;

TEST_CASE("rouge identity and disjoint cases") {
  const auto same = metrics::rouge("本院查明事实", "本院查明事实");
  CHECK(same.r1.f1 == 1.0);
  CHECK(same.r2.f1 == 1.0);
  CHECK(same.rl.f1 == 1.0);

  const auto disjoint = metrics::rouge("甲乙丙", "戊己庚");
  CHECK(disjoint.r1.f1 == 0.0);
  CHECK(disjoint.r2.f1 == 0.0);
  CHECK(disjoint.rl.f1 == 0.0);
}

TEST_CASE("rouge worked example: the cat sat vs the cat ran") {
  const auto triple = metrics::rouge("the cat sat", "the cat ran");
  CHECK(triple.r1.recall == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(triple.r1.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(triple.r1.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(triple.r2.recall == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(triple.r2.precision == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(triple.r2.f1 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(triple.rl.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("rouge empty after tokenization throws") {
  CHECK_THROWS_AS(metrics::rouge("", "text"), EmptyAfterTokenization);
  CHECK_THROWS_AS(metrics::rouge("text", "   "), EmptyAfterTokenization);
}

TEST_CASE("rouge swap symmetry") {
  const auto forward = metrics::rouge("本院查明一二三", "本院认为三二一");
  const auto backward = metrics::rouge("本院认为三二一", "本院查明一二三");
  CHECK(forward.r1.recall == backward.r1.precision);
  CHECK(forward.r1.precision == backward.r1.recall);
  CHECK(forward.r1.f1 == backward.r1.f1);
  CHECK(forward.rl.f1 == backward.rl.f1);
}

namespace {

std::string random_text(Rng& rng, std::size_t tokens) {
  std::string s;
  for (std::size_t i = 0; i < tokens; ++i) {
    if (rng.next_below(2) == 0) {
      s += text::encode_utf8(char32_t(U'一' + rng.next_below(12)));
    } else {
      s += "w" + std::to_string(rng.next_below(12));
      s += ' ';
    }
  }
  return s;
}

}  // namespace

TEST_CASE("rouge matches the brute-force oracle on random pairs") {
  Rng rng(53);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto cand_text = random_text(rng, 1 + rng.next_below(30));
    const auto ref_text = random_text(rng, 1 + rng.next_below(30));
    const auto cand = text::tokenize(cand_text);
    const auto ref = text::tokenize(ref_text);
    const auto triple = metrics::rouge(cand_text, ref_text);

    for (std::size_t n : {std::size_t(1), std::size_t(2)}) {
      const auto counts = oracles::ngram_overlap(cand, ref, n);
      const double recall = counts.ref_total > 0 ? double(counts.overlap) / counts.ref_total : 0.0;
      const double precision =
          counts.cand_total > 0 ? double(counts.overlap) / counts.cand_total : 0.0;
      const double f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
      const auto& score = n == 1 ? triple.r1 : triple.r2;
      CHECK(score.recall == recall);
      CHECK(score.precision == precision);
      CHECK(score.f1 == f1);
    }
    const double lcs = double(oracles::lcs_recursive(cand, ref));
    CHECK(triple.rl.recall == lcs / double(ref.size()));
    CHECK(triple.rl.precision == lcs / double(cand.size()));
  }
}

TEST_CASE("embed_score identity and orthogonal cases") {
  clients::HashingEmbedder embedder;
  const auto same = metrics::embed_score("故意伤害案件", "故意伤害案件", embedder);
  CHECK(same.f1 == doctest::Approx(1.0).epsilon(1e-6));

  // Hand-set embedding table with pairwise-orthogonal tokens.
  struct TableEmbedder : clients::TextEmbedder {
    std::size_t dim() const override { return 4; }
    clients::EmbeddingVector embed(std::string_view token) override {
      clients::EmbeddingVector v;
      v.values.assign(4, 0.0);
      if (token == "甲") v.values[0] = 1.0;
      else if (token == "乙") v.values[1] = 1.0;
      else if (token == "丙") v.values[2] = 1.0;
      else v.values[3] = 1.0;
      return v;
    }
  } table;
  const auto orthogonal = metrics::embed_score("甲", "乙", table);
  CHECK(orthogonal.f1 == 0.0);
}

TEST_CASE("embed_score three-token case matches the hand-computed greedy max") {
  struct TableEmbedder : clients::TextEmbedder {
    std::size_t dim() const override { return 2; }
    clients::EmbeddingVector embed(std::string_view token) override {
      clients::EmbeddingVector v;
      v.values.assign(2, 0.0);
      // 甲 = (1,0); 乙 = (0,1); 丙 = (0.6,0.8)
      if (token == "甲") v.values = {1.0, 0.0};
      else if (token == "乙") v.values = {0.0, 1.0};
      else v.values = {0.6, 0.8};
      return v;
    }
  } table;
  // candidate 甲乙, reference 丙: recall = max(cos(丙,甲), cos(丙,乙)) = 0.8
  // precision = mean(cos(甲,丙), cos(乙,丙)) = (0.6 + 0.8) / 2 = 0.7
  const auto score = metrics::embed_score("甲乙", "丙", table);
  CHECK(score.recall == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(score.precision == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(score.f1 == doctest::Approx(2 * 0.7 * 0.8 / 1.5).epsilon(1e-12));
}

TEST_CASE("extraction_score exact match and empty prediction") {
  const SlotMap gold = {{"a", "60"}, {"b", "1"}, {"c", "0"}, {"d", "x"}};
  const auto perfect = metrics::extraction_score(gold, gold);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.f1 == 1.0);

  const auto empty = metrics::extraction_score(gold, {});
  CHECK(empty.accuracy == 0.0);
  CHECK(empty.recall == 0.0);
  CHECK(empty.precision == 0.0);  // 0/0 convention
  CHECK(empty.f1 == 0.0);
}

TEST_CASE("extraction_score hand-counted example") {
  const SlotMap gold = {{"a", "60"}, {"b", "1"}};
  const SlotMap pred = {{"a", "60"}, {"c", "1"}};
  const auto counts = metrics::extraction_counts(gold, pred);
  CHECK(counts.tp == 1);
  CHECK(counts.fp == 1);
  CHECK(counts.fn == 1);
  const auto score = metrics::extraction_score(gold, pred);
  CHECK(score.precision == 0.5);
  CHECK(score.recall == 0.5);
  CHECK(score.f1 == 0.5);
  CHECK(score.accuracy == 0.5);
}

TEST_CASE("value mismatch counts as both fp and fn") {
  const SlotMap gold = {{"a", "60"}};
  const SlotMap pred = {{"a", "59"}};
  const auto counts = metrics::extraction_counts(gold, pred);
  CHECK(counts.tp == 0);
  CHECK(counts.fp == 1);
  CHECK(counts.fn == 1);
}

TEST_CASE("adding a correct slot never lowers recall or f1") {
  Rng rng(71);
  for (int trial = 0; trial < 200; ++trial) {
    SlotMap gold, pred;
    const int n = 2 + int(rng.next_below(5));
    for (int i = 0; i < n; ++i)
      gold["e" + std::to_string(i)] = std::to_string(rng.next_below(3));
    for (const auto& [name, value] : gold)
      if (rng.next_below(2) == 0) pred[name] = rng.next_below(2) ? value : "wrong";
    // find a gold slot missing from pred
    std::string missing;
    for (const auto& [name, value] : gold)
      if (!pred.count(name)) missing = name;
    if (missing.empty()) continue;
    const auto before = metrics::extraction_score(gold, pred);
    auto pred_grown = pred;
    pred_grown[missing] = gold.at(missing);
    const auto after = metrics::extraction_score(gold, pred_grown);
    CHECK(after.recall >= before.recall);
    CHECK(after.f1 >= before.f1);
  }
}

TEST_CASE("aggregate_by_group micro-aggregates and appends Average") {
  std::vector<metrics::ExtractionCounts> per_doc;
  std::vector<std::string> labels;
  // group Beijing: one perfect doc of 4 slots
  per_doc.push_back(metrics::extraction_counts({{"a", "1"}, {"b", "1"}, {"c", "1"}, {"d", "1"}},
                                               {{"a", "1"}, {"b", "1"}, {"c", "1"}, {"d", "1"}}));
  labels.push_back("Beijing");
  // group Tianjin: half right
  per_doc.push_back(metrics::extraction_counts({{"a", "1"}, {"b", "2"}}, {{"a", "1"}, {"b", "x"}}));
  labels.push_back("Tianjin");

  const auto rows = metrics::aggregate_by_group(per_doc, labels);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].group == "Beijing");
  CHECK(rows[0].f1 == 1.0);
  CHECK(rows[1].group == "Tianjin");
  CHECK(rows[1].f1 == 0.5);
  CHECK(rows[2].group == "Average");
  CHECK(rows[2].f1 == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(rows[2].accuracy == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("aggregate single group Average equals the group row") {
  std::vector<metrics::ExtractionCounts> per_doc = {
      metrics::extraction_counts({{"a", "1"}}, {{"a", "1"}})};
  const auto rows = metrics::aggregate_by_group(per_doc, {"Hebei"});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].f1 == rows[1].f1);
  CHECK(rows[0].accuracy == rows[1].accuracy);
}

TEST_CASE("aggregate rejects missing labels") {
  std::vector<metrics::ExtractionCounts> per_doc = {
      metrics::extraction_counts({{"a", "1"}}, {{"a", "1"}})};
  CHECK_THROWS_AS(metrics::aggregate_by_group(per_doc, {}), UnknownGroupLabel);
  CHECK_THROWS_AS(metrics::aggregate_by_group(per_doc, {""}), UnknownGroupLabel);
}

TEST_CASE("report csv renders x100 at one decimal") {
  std::vector<metrics::ExtractionScore> rows(1);
  rows[0].group = "Beijing";
  rows[0].accuracy = 0.335;
  rows[0].recall = 0.363;
  rows[0].precision = 0.849;
  rows[0].f1 = 0.491;
  const auto csv = metrics::report_csv(rows);
  CHECK(csv.find("group,accuracy,recall,precision,f1") == 0);
  CHECK(csv.find("Beijing,33.5,36.3,84.9,49.1") != std::string::npos);
}

TEST_CASE("all rouge scores stay in [0,1] on random inputs") {
  Rng rng(81);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_text(rng, 1 + rng.next_below(12));
    const auto b = random_text(rng, 1 + rng.next_below(12));
    const auto triple = metrics::rouge(a, b);
    for (const auto& s : {triple.r1, triple.r2, triple.rl}) {
      CHECK(s.recall >= 0.0);
      CHECK(s.recall <= 1.0);
      CHECK(s.precision >= 0.0);
      CHECK(s.precision <= 1.0);
      CHECK(s.f1 >= 0.0);
      CHECK(s.f1 <= 1.0);
    }
  }
}
