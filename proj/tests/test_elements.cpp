#include <doctest.h>

#include "lexkit/elements.hpp"
#include "lexkit/errors.hpp"
#include "oracles.hpp"

using namespace lexkit;
using elements::ElementValue;

TEST_CASE("normalize_duration worked examples") {
  CHECK(elements::normalize_duration("五年") == 60);
  CHECK(elements::normalize_duration("十二个月") == 12);
  CHECK(elements::normalize_duration("一年二个月") == 14);
  CHECK(elements::normalize_duration("3年2个月") == 38);
  CHECK(elements::normalize_duration("6个月") == 6);
  CHECK(elements::normalize_duration("八月") == 8);
}

TEST_CASE("normalize_duration rejects non-durations") {
  CHECK_THROWS_AS(elements::normalize_duration("无期"), UnparseableDuration);
  CHECK_THROWS_AS(elements::normalize_duration("５万元"), UnparseableDuration);
  CHECK_THROWS_AS(elements::normalize_duration(""), UnparseableDuration);
  CHECK_THROWS_AS(elements::normalize_duration("年"), UnparseableDuration);
  CHECK_THROWS_AS(elements::normalize_duration("三五年"), UnparseableDuration);
}

TEST_CASE("duration property 12y + m against the numeral-render oracle") {
  for (int y = 0; y <= 30; ++y) {
    for (int m = 0; m <= 11; ++m) {
      // hanzi numerals
      std::string hanzi;
      if (y > 0 && m > 0)
        hanzi = oracles::render_hanzi(y) + "年" + oracles::render_hanzi(m) + "个月";
      else if (y > 0)
        hanzi = oracles::render_hanzi(y) + "年";
      else
        hanzi = oracles::render_hanzi(m) + "个月";
      CHECK(elements::normalize_duration(hanzi) == 12 * y + m);

      // ascii digits
      std::string digits;
      if (y > 0 && m > 0)
        digits = std::to_string(y) + "年" + std::to_string(m) + "个月";
      else if (y > 0)
        digits = std::to_string(y) + "年";
      else
        digits = std::to_string(m) + "个月";
      CHECK(elements::normalize_duration(digits) == 12 * y + m);
    }
  }
}

TEST_CASE("parse_numeral handles positional forms") {
  CHECK(elements::parse_numeral("一百二十三") == 123);
  CHECK(elements::parse_numeral("一百零三") == 103);
  CHECK(elements::parse_numeral("二十") == 20);
  CHECK(elements::parse_numeral("十") == 10);
  CHECK(elements::parse_numeral("〇") == 0);
  CHECK(elements::parse_numeral("47") == 47);
  CHECK(!elements::parse_numeral("abc").has_value());
  CHECK(!elements::parse_numeral("1十").has_value());
}

TEST_CASE("validate_extraction flags hallucinated elements") {
  const auto catalog = elements::starter_catalog();
  const std::vector<ElementValue> pred = {{"无不良影响", true}, {"自首", true}};
  const auto result = elements::validate_extraction(pred, catalog);
  REQUIRE(result.violations.size() == 1);
  CHECK(result.violations[0].name == "无不良影响");
  CHECK(result.violations[0].kind == elements::ViolationKind::hallucinated_element);
  REQUIRE(result.validated.size() == 1);
  CHECK(result.validated[0].name == "自首");
}

TEST_CASE("validate_extraction on empty input") {
  const auto catalog = elements::starter_catalog();
  const auto result = elements::validate_extraction({}, catalog);
  CHECK(result.validated.empty());
  CHECK(result.violations.empty());
}

TEST_CASE("validate_extraction: schema check only, mis-scaled durations pass") {
  const auto catalog = elements::starter_catalog();
  const std::vector<ElementValue> pred = {{"有期徒刑", std::int64_t(5)}};
  const auto result = elements::validate_extraction(pred, catalog);
  CHECK(result.violations.empty());
  REQUIRE(result.validated.size() == 1);
  CHECK(std::get<std::int64_t>(result.validated[0].value) == 5);
}

TEST_CASE("validate_extraction flags type mismatches") {
  const auto catalog = elements::starter_catalog();
  const std::vector<ElementValue> pred = {{"有期徒刑", true},                // flag for duration
                                          {"轻伤人数", std::int64_t(-2)}};  // negative count
  const auto result = elements::validate_extraction(pred, catalog);
  CHECK(result.validated.empty());
  REQUIRE(result.violations.size() == 2);
  CHECK(result.violations[0].kind == elements::ViolationKind::type_mismatch);
  CHECK(result.violations[1].kind == elements::ViolationKind::type_mismatch);
}

TEST_CASE("validate_extraction never passes names outside the catalog") {
  const auto catalog = elements::starter_catalog();
  const std::vector<ElementValue> pred = {
      {"x", true}, {"自首", true}, {"罚金", 100.0}, {"y", std::string("t")}};
  const auto result = elements::validate_extraction(pred, catalog);
  for (const auto& v : result.validated) CHECK(catalog.contains(v.name));
}

TEST_CASE("parse_value per kind") {
  const auto catalog = elements::starter_catalog();
  const auto parse = [&](const char* name, const char* raw) {
    return elements::parse_value(*catalog.find(name), raw);
  };
  CHECK(std::get<bool>(parse("自首", "是").value) == true);
  CHECK(std::get<bool>(parse("自首", "否").value) == false);
  CHECK(std::get<std::int64_t>(parse("轻伤人数", "2人").value) == 2);
  CHECK(std::get<std::int64_t>(parse("有期徒刑", "一年二个月").value) == 14);
  CHECK(std::get<std::int64_t>(parse("有期徒刑", "9").value) == 9);
  CHECK(std::get<double>(parse("赔偿金额", "20000元").value) == doctest::Approx(20000.0));
  CHECK(std::get<double>(parse("犯罪金额", "585.3").value) == doctest::Approx(585.3));
}

TEST_CASE("canonical_string trims amounts") {
  CHECK(elements::canonical_string({"x", 663.0}) == "663");
  CHECK(elements::canonical_string({"x", 585.3}) == "585.3");
  CHECK(elements::canonical_string({"x", std::int64_t(60)}) == "60");
  CHECK(elements::canonical_string({"x", true}) == "1");
}

TEST_CASE("canonicalize_raw maps equivalent forms together") {
  const auto catalog = elements::starter_catalog();
  CHECK(elements::canonicalize_raw(catalog, "有期徒刑", "五年") ==
        elements::canonicalize_raw(catalog, "有期徒刑", "60"));
  CHECK(elements::canonicalize_raw(catalog, "犯罪金额", "663") ==
        elements::canonicalize_raw(catalog, "犯罪金额", "663.00"));
  // junk falls back to the trimmed raw text
  CHECK(elements::canonicalize_raw(catalog, "有期徒刑", " garbled ") == "garbled");
}

TEST_CASE("catalog jsonl round trip") {
  const auto catalog = elements::starter_catalog();
  const std::string path = "/tmp/lexkit_test_catalog.jsonl";
  catalog.to_jsonl(path);
  const auto loaded = elements::ElementCatalog::from_jsonl(path);
  REQUIRE(loaded.size() == catalog.size());
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    CHECK(loaded.elements()[i].name == catalog.elements()[i].name);
    CHECK(loaded.elements()[i].kind == catalog.elements()[i].kind);
    CHECK(loaded.elements()[i].augmented_description == catalog.elements()[i].augmented_description);
  }
  CHECK(loaded.fully_augmented());
}

TEST_CASE("shipped catalog file matches the builtin starter catalog") {
  const auto shipped = elements::ElementCatalog::from_jsonl("data/catalog.jsonl");
  const auto builtin = elements::starter_catalog();
  REQUIRE(shipped.size() == builtin.size());
  for (std::size_t i = 0; i < builtin.size(); ++i) {
    CHECK(shipped.elements()[i].name == builtin.elements()[i].name);
    CHECK(shipped.elements()[i].kind == builtin.elements()[i].kind);
    CHECK(shipped.elements()[i].description == builtin.elements()[i].description);
    CHECK(shipped.elements()[i].augmented_description ==
          builtin.elements()[i].augmented_description);
  }
}

TEST_CASE("starter catalog covers the core sentence terms") {
  const auto catalog = elements::starter_catalog();
  for (const char* name : {"管制", "拘役", "有期徒刑", "无期徒刑", "死刑", "缓刑",
                           "附带民事诉讼", "轻微伤人数", "轻伤人数", "轻伤一级人数"})
    CHECK(catalog.contains(name));
  CHECK(catalog.find("有期徒刑")->kind == elements::ElementKind::duration_months);
  CHECK(catalog.find("无期徒刑")->kind == elements::ElementKind::flag);
  CHECK(catalog.find("死刑")->kind == elements::ElementKind::flag);
  CHECK(catalog.find("轻伤人数")->kind == elements::ElementKind::count);
}
