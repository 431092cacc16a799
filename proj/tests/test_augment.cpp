#include <doctest.h>

#include "lexkit/augment.hpp"
#include "lexkit/errors.hpp"
#include "lexkit/jsonl.hpp"

using namespace lexkit;
using augment::AugmentJob;
using augment::TemplateCatalog;

TEST_CASE("render_prompt substitutes text and count") {
  const auto templates = TemplateCatalog::builtin();
  AugmentJob job;
  job.legal_text = "第九十六条 机关法人的条文内容X";
  job.num_qa = 3;
  const auto prompt = augment::render_prompt(job, templates);
  CHECK(prompt.find(job.legal_text) != std::string::npos);
  CHECK(prompt.find("generate 3 high-quality") != std::string::npos);
  CHECK(prompt.find("{prompt}") == std::string::npos);
  CHECK(prompt.find("{num_qa}") == std::string::npos);
  // text appears exactly once
  const auto first = prompt.find(job.legal_text);
  CHECK(prompt.find(job.legal_text, first + 1) == std::string::npos);
}

TEST_CASE("render_prompt num_qa=1 boundary") {
  const auto templates = TemplateCatalog::builtin();
  AugmentJob job;
  job.legal_text = "x";
  job.num_qa = 1;
  CHECK_NOTHROW(augment::render_prompt(job, templates));
}

TEST_CASE("unknown template and stray placeholders") {
  auto templates = TemplateCatalog::builtin();
  AugmentJob job;
  job.legal_text = "x";
  job.template_id = "missing";
  CHECK_THROWS_AS(augment::render_prompt(job, templates), UnknownTemplate);

  templates.add("bad", "text {prompt} with {foo} left over");
  job.template_id = "bad";
  CHECK_THROWS_AS(augment::render_prompt(job, templates), UnresolvedPlaceholder);
}

TEST_CASE("render_prompt is injective in legal_text") {
  const auto templates = TemplateCatalog::builtin();
  AugmentJob a, b;
  a.legal_text = "条文甲";
  b.legal_text = "条文乙";
  a.num_qa = b.num_qa = 2;
  CHECK(augment::render_prompt(a, templates) != augment::render_prompt(b, templates));
}

TEST_CASE("parse_qa extracts a clean array") {
  const std::string response =
      R"([{"input": "问题一", "output": "答案一"}, {"input": "问题二", "output": "答案二"}])";
  const auto result = augment::parse_qa(response, 2);
  REQUIRE(result.pairs.size() == 2);
  CHECK(!result.diagnostics.count_mismatch);
  CHECK(result.pairs[0].input == "问题一");
  CHECK(result.pairs[1].output == "答案二");
}

TEST_CASE("parse_qa recovers the array from surrounding prose") {
  const std::string response =
      "好的，以下是生成的问答对 [注意格式]：\n"
      "[{\"input\": \"q\", \"output\": \"a\"}]\n"
      "希望有帮助。";
  const auto result = augment::parse_qa(response, 1);
  REQUIRE(result.pairs.size() == 1);
  CHECK(result.pairs[0].input == "q");
}

TEST_CASE("parse_qa handles the criminal-law article seed pair") {
  Json pair;
  pair["input"] = "刑法第一条的内容是什么？";
  pair["output"] =
      "【立法宗旨】为了惩罚犯罪，保护人民，根据宪法，结合我国同犯罪作斗争的具体经验及实际情况，"
      "制定本法。";
  Json arr = Json::array({pair});
  const auto result = augment::parse_qa(arr.dump(), 1);
  REQUIRE(result.pairs.size() == 1);
  CHECK(result.pairs[0].input == "刑法第一条的内容是什么？");
  CHECK(result.pairs[0].output.find("惩罚犯罪") != std::string::npos);
}

TEST_CASE("parse_qa diagnostics: count mismatch, duplicates, empty fields") {
  const std::string response =
      R"([{"input": "q1", "output": "a1"},
          {"input": " q1 ", "output": "dup"},
          {"input": "q2", "output": "  "},
          {"input": "q3"},
          {"input": "q4", "output": "a4"}])";
  const auto result = augment::parse_qa(response, 5);
  CHECK(result.pairs.size() == 2);  // q1 and q4
  CHECK(result.diagnostics.count_mismatch);
  CHECK(result.diagnostics.dropped_duplicate == 1);
  CHECK(result.diagnostics.dropped_empty_field == 1);
  CHECK(result.diagnostics.dropped_malformed == 1);
}

TEST_CASE("parse_qa never exceeds expected without a count diagnostic") {
  const std::string response =
      R"([{"input": "q1", "output": "a1"}, {"input": "q2", "output": "a2"},
          {"input": "q3", "output": "a3"}])";
  const auto result = augment::parse_qa(response, 2);
  CHECK(result.pairs.size() == 3);
  CHECK(result.diagnostics.count_mismatch);
}

TEST_CASE("parse_qa with nothing parseable throws") {
  CHECK_THROWS_AS(augment::parse_qa("no array here", 1), NoParsableArray);
  CHECK_THROWS_AS(augment::parse_qa("broken [ {\"input\": ", 1), NoParsableArray);
}

TEST_CASE("run_augment end to end with the stub") {
  const std::string laws_path = "/tmp/lexkit_test_laws.jsonl";
  std::vector<Json> laws;
  Json a1;
  a1["id"] = "刑法第一条";
  a1["text"] = "为了惩罚犯罪，保护人民，制定本法。";
  laws.push_back(a1);
  write_jsonl(laws_path, laws);

  clients::StubGenerator generator(11);
  const std::string out_path = "/tmp/lexkit_test_qa.jsonl";
  const auto stats = augment::run_augment(laws_path, 2, TemplateCatalog::builtin(),
                                          "qa_generation", generator, out_path);
  CHECK(stats.jobs == 1);
  CHECK(stats.pairs == 2);
  const auto rows = read_jsonl(out_path);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].at("source_article") == "刑法第一条");
  CHECK(!rows[0].at("input").get<std::string>().empty());
  CHECK(!rows[0].at("output").get<std::string>().empty());
}
