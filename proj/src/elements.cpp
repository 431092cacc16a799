#include "lexkit/elements.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "lexkit/errors.hpp"
#include "lexkit/text.hpp"

namespace lexkit::elements {

ElementKind kind_from_string(const std::string& s) {
  if (s == "flag") return ElementKind::flag;
  if (s == "count") return ElementKind::count;
  if (s == "duration_months") return ElementKind::duration_months;
  if (s == "amount") return ElementKind::amount;
  if (s == "text") return ElementKind::text;
  throw Error("unknown element kind: " + s);
}

std::string to_string(ElementKind k) {
  switch (k) {
    case ElementKind::flag: return "flag";
    case ElementKind::count: return "count";
    case ElementKind::duration_months: return "duration_months";
    case ElementKind::amount: return "amount";
    case ElementKind::text: return "text";
  }
  return "text";
}

ElementCatalog::ElementCatalog(std::vector<ElementDef> defs) : elements_(std::move(defs)) {
  if (elements_.empty()) throw Error("element catalog must be non-empty");
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (!index_.emplace(elements_[i].name, i).second)
      throw Error("duplicate element name: " + elements_[i].name);
  }
}

const ElementDef* ElementCatalog::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &elements_[it->second];
}

bool ElementCatalog::fully_augmented() const {
  return std::all_of(elements_.begin(), elements_.end(), [](const ElementDef& e) {
    return e.augmented_description && !e.augmented_description->empty();
  });
}

ElementCatalog ElementCatalog::from_jsonl(const std::string& path) {
  std::vector<ElementDef> defs;
  for (const auto& row : read_jsonl(path)) {
    ElementDef def;
    def.name = row.at("name").get<std::string>();
    def.kind = kind_from_string(row.at("kind").get<std::string>());
    def.description = row.value("description", def.name);
    if (row.contains("augmented_description") && !row["augmented_description"].is_null())
      def.augmented_description = row["augmented_description"].get<std::string>();
    defs.push_back(std::move(def));
  }
  return ElementCatalog(std::move(defs));
}

void ElementCatalog::to_jsonl(const std::string& path) const {
  std::vector<Json> rows;
  for (const auto& def : elements_) {
    Json row;
    row["name"] = def.name;
    row["kind"] = to_string(def.kind);
    row["description"] = def.description;
    row["augmented_description"] =
        def.augmented_description ? Json(*def.augmented_description) : Json(nullptr);
    rows.push_back(std::move(row));
  }
  write_jsonl(path, rows);
}

namespace {

int hanzi_digit(char32_t cp) {
  switch (cp) {
    case U'〇': case U'零': return 0;
    case U'一': return 1;
    case U'二': return 2;
    case U'三': return 3;
    case U'四': return 4;
    case U'五': return 5;
    case U'六': return 6;
    case U'七': return 7;
    case U'八': return 8;
    case U'九': return 9;
    default: return -1;
  }
}

std::optional<std::int64_t> parse_hanzi_numeral(const std::vector<char32_t>& cps) {
  std::int64_t total = 0;
  std::int64_t pending = -1;
  bool seen_any = false, seen_shi = false, seen_bai = false;
  for (char32_t cp : cps) {
    if (cp == U'百') {
      if (seen_bai || seen_shi) return std::nullopt;
      total += (pending <= 0 ? 1 : pending) * 100;
      pending = -1;
      seen_bai = true;
      seen_any = true;
    } else if (cp == U'十') {
      if (seen_shi) return std::nullopt;
      total += (pending <= 0 ? 1 : pending) * 10;
      pending = -1;
      seen_shi = true;
      seen_any = true;
    } else {
      const int d = hanzi_digit(cp);
      if (d < 0) return std::nullopt;
      if (d == 0) {  // 零/〇 is a positional connector and contributes nothing
        seen_any = true;
        continue;
      }
      if (pending != -1) return std::nullopt;  // two bare digits in a row
      pending = d;
      seen_any = true;
    }
  }
  if (!seen_any) return std::nullopt;
  if (pending != -1) total += pending;
  return total;
}

bool all_ascii_digits(const std::vector<char32_t>& cps) {
  return !cps.empty() && std::all_of(cps.begin(), cps.end(), [](char32_t c) {
    return c >= '0' && c <= '9';
  });
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

std::optional<std::int64_t> parse_numeral(const std::string& token) {
  const auto cps = text::codepoints(token);
  if (cps.empty()) return std::nullopt;
  if (all_ascii_digits(cps)) {
    if (cps.size() > 9) return std::nullopt;
    std::int64_t v = 0;
    for (char32_t c : cps) v = v * 10 + (c - '0');
    return v;
  }
  return parse_hanzi_numeral(cps);
}

std::int64_t normalize_duration(const std::string& text_value) {
  const auto cps = text::codepoints(trim(text_value));
  auto join = [&](std::size_t b, std::size_t e) {
    std::string s;
    for (std::size_t i = b; i < e; ++i) s += text::encode_utf8(cps[i]);
    return s;
  };
  auto parse_month_part = [&](std::size_t b, std::size_t e) -> std::optional<std::int64_t> {
    // NUM 个? 月
    if (e == b || cps[e - 1] != U'月') return std::nullopt;
    --e;
    if (e > b && cps[e - 1] == U'个') --e;
    if (e == b) return std::nullopt;
    return parse_numeral(join(b, e));
  };

  const auto year_pos = std::find(cps.begin(), cps.end(), U'年');
  if (year_pos != cps.end()) {
    const std::size_t yi = std::size_t(year_pos - cps.begin());
    const auto years = parse_numeral(join(0, yi));
    if (!years) throw UnparseableDuration("not a duration: " + text_value);
    std::int64_t months = 0;
    if (yi + 1 < cps.size()) {
      const auto m = parse_month_part(yi + 1, cps.size());
      if (!m) throw UnparseableDuration("not a duration: " + text_value);
      months = *m;
    }
    return *years * 12 + months;
  }
  const auto months = parse_month_part(0, cps.size());
  if (!months) throw UnparseableDuration("not a duration: " + text_value);
  return *months;
}

namespace {

std::string strip_unit_suffix(const std::string& s, std::initializer_list<char32_t> units) {
  auto cps = text::codepoints(s);
  if (!cps.empty() && std::find(units.begin(), units.end(), cps.back()) != units.end()) {
    std::string out;
    for (std::size_t i = 0; i + 1 < cps.size(); ++i) out += text::encode_utf8(cps[i]);
    return out;
  }
  return s;
}

}  // namespace

ElementValue parse_value(const ElementDef& def, const std::string& raw) {
  const std::string s = trim(raw);
  switch (def.kind) {
    case ElementKind::flag: {
      if (s == "是" || s == "有" || s == "true" || s == "1" || s == "yes")
        return {def.name, true};
      if (s == "否" || s == "无" || s == "false" || s == "0" || s == "no" || s.empty())
        return {def.name, false};
      throw Error("unparseable flag value for " + def.name + ": " + raw);
    }
    case ElementKind::count: {
      const auto n = parse_numeral(strip_unit_suffix(s, {U'人', U'次', U'个'}));
      if (!n || *n < 0) throw Error("unparseable count for " + def.name + ": " + raw);
      return {def.name, *n};
    }
    case ElementKind::duration_months: {
      // A bare number is taken as already denominated in months; mis-scaled
      // values are a scoring matter, not a schema violation.
      if (const auto n = parse_numeral(s)) return {def.name, *n};
      return {def.name, normalize_duration(s)};
    }
    case ElementKind::amount: {
      std::string cleaned;
      for (char c : strip_unit_suffix(s, {U'元'}))
        if (c != ',') cleaned.push_back(c);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cleaned, &used);
      } catch (...) {
        throw Error("unparseable amount for " + def.name + ": " + raw);
      }
      if (used != cleaned.size() || !(v >= 0.0))
        throw Error("unparseable amount for " + def.name + ": " + raw);
      return {def.name, v};
    }
    case ElementKind::text:
      return {def.name, s};
  }
  return {def.name, s};
}

std::string canonical_string(const ElementValue& v) {
  if (std::holds_alternative<bool>(v.value)) return std::get<bool>(v.value) ? "1" : "0";
  if (std::holds_alternative<std::int64_t>(v.value))
    return std::to_string(std::get<std::int64_t>(v.value));
  if (std::holds_alternative<double>(v.value)) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", std::get<double>(v.value));
    std::string s(buf);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }
  return std::get<std::string>(v.value);
}

ValidationResult validate_extraction(const std::vector<ElementValue>& pred,
                                     const ElementCatalog& catalog) {
  ValidationResult result;
  for (const auto& v : pred) {
    const ElementDef* def = catalog.find(v.name);
    if (def == nullptr) {
      result.violations.push_back({v.name, ViolationKind::hallucinated_element});
      continue;
    }
    bool ok = false;
    switch (def->kind) {
      case ElementKind::flag:
        ok = std::holds_alternative<bool>(v.value);
        break;
      case ElementKind::count:
      case ElementKind::duration_months:
        ok = std::holds_alternative<std::int64_t>(v.value) && std::get<std::int64_t>(v.value) >= 0;
        break;
      case ElementKind::amount:
        ok = std::holds_alternative<double>(v.value) && std::get<double>(v.value) >= 0.0;
        break;
      case ElementKind::text:
        ok = std::holds_alternative<std::string>(v.value);
        break;
    }
    if (ok)
      result.validated.push_back(v);
    else
      result.violations.push_back({v.name, ViolationKind::type_mismatch});
  }
  return result;
}

std::string canonicalize_raw(const ElementCatalog& catalog, const std::string& name,
                             const std::string& raw) {
  const ElementDef* def = catalog.find(name);
  if (def == nullptr) return trim(raw);
  try {
    return canonical_string(parse_value(*def, raw));
  } catch (const Error&) {
    return trim(raw);
  }
}

ElementCatalog starter_catalog() {
  using K = ElementKind;
  auto def = [](const char* name, K kind, const char* augmented) {
    ElementDef d;
    d.name = name;
    d.kind = kind;
    d.description = name;
    d.augmented_description = std::string(augmented);
    return d;
  };
  std::vector<ElementDef> defs = {
      def("管制", K::duration_months,
          "管制（指某人被限制自由，但不完全剥夺其自由的刑罚，通常适用于罪行较轻的犯罪分子，可能包括"
          "定期报告、限制居住区域等条件）"),
      def("拘役", K::duration_months,
          "拘役（指对某人进行短期的限制自由的刑罚，通常为1个月至6个月，实施拘役时，嫌疑人仍然在一定"
          "程度上保留自由，但会受到某些限制，如不得随意离开指定地点等）"),
      def("有期徒刑", K::duration_months,
          "有期徒刑（指法院判决某人必须在监狱服刑一定年限的刑罚，通常为几年，服刑期满后，可以重获自"
          "由，但刑期长短会根据犯罪的性质和严重程度来决定）"),
      def("无期徒刑", K::flag,
          "无期徒刑（指法院判决某人终身在监狱服刑，虽然理论上没有刑期限制，但可以在服刑一定年限后申"
          "请假释，最终是否释放取决于罪犯表现及其他相关因素）"),
      def("死刑", K::flag,
          "死刑（指法院判决某人执行死刑，意味着对犯罪分子实施致命处罚，通常用于极其严重的犯罪行为，"
          "如故意杀人、恐怖活动等。死刑执行后，罪犯将无法再活跃于社会）"),
      def("缓刑", K::duration_months,
          "缓刑（指法院在判定某人有罪的情况下，暂时不执行刑罚，而是给予一定的观察期，如果在观察期内"
          "没有再犯，可以免于执行刑罚，但若在缓刑期内再犯，可能会被执行原定刑罚）"),
      def("附带民事诉讼", K::flag,
          "附带民事诉讼（指在刑事案件审理过程中，受害人或其他相关方提出的民事赔偿请求，法院可以在审"
          "理刑事案件的同时，处理相关民事诉讼问题）"),
      def("轻微伤人数", K::count,
          "轻微伤人数（指在某些案件中，受害人受到的伤害较轻，但依然需要评估伤害程度和责任分配，通常"
          "由医疗鉴定机构进行评估）"),
      def("轻伤人数", K::count,
          "轻伤人数（指在案件中，受害人遭受的伤害为轻度，属于刑法中规定的轻伤范畴，通常会对加害人进"
          "行一定的刑罚处罚）"),
      def("轻伤一级人数", K::count,
          "轻伤一级人数（指受害人在案件中遭受轻伤，伤情较为严重，但尚不构成重伤，具体伤情可根据伤残"
          "程度分级评定）"),
      def("重伤人数", K::count,
          "重伤人数（指案件中经鉴定构成重伤的受害人数量，伤情严重，通常显著加重量刑）"),
      def("自首", K::flag,
          "自首（指犯罪以后自动投案并如实供述自己罪行的情节，依法可以从轻或者减轻处罚）"),
      def("坦白", K::flag,
          "坦白（指到案后如实供述司法机关尚未掌握的本人罪行的情节，可以从宽处理）"),
      def("认罪认罚", K::flag,
          "认罪认罚（指被告人自愿如实供述罪行、同意量刑建议并签署具结书的情节，依法可以从宽处理）"),
      def("谅解", K::flag,
          "谅解（指取得被害人或者其家属出具谅解书的情节，通常作为酌定从轻处罚的依据）"),
      def("从轻处罚", K::flag,
          "从轻处罚（指法院在法定刑幅度内对被告人判处较轻刑罚的情节认定）"),
      def("持械斗殴", K::flag,
          "持械斗殴（指在斗殴中使用棍棒、刀具等器械的情节，通常从重处罚）"),
      def("互殴", K::flag,
          "互殴（指双方相互殴打、均实施伤害行为的情节，影响双方责任的划分）"),
      def("共犯", K::flag,
          "共犯（指二人以上共同故意实施犯罪，需区分主犯与从犯并分别量刑）"),
      def("前科劣迹", K::flag,
          "前科劣迹（指被告人曾受过刑事处罚或者行政处罚的记录，通常作为酌定从重情节）"),
      def("单一被告人", K::flag,
          "单一被告人（指案件中仅有一名被告人、不涉及共同犯罪的情形）"),
      def("遵守社区矫正规定", K::flag,
          "遵守社区矫正规定（指被宣告缓刑或者判处管制的罪犯应当遵守报告、会客、外出审批等社区矫正监"
          "督管理规定）"),
      def("赔偿金额", K::amount,
          "赔偿金额（指被告人实际赔偿被害人经济损失的金额，以元为单位，通常影响从宽处罚的幅度）"),
      def("罚金", K::amount,
          "罚金（指法院判处被告人向国家缴纳一定金额金钱的刑罚，以元为单位）"),
      def("犯罪金额", K::amount,
          "犯罪金额（指犯罪行为所涉及财物的总价值，以元为单位，如抢劫、盗窃所得的合计数额）"),
  };
  return ElementCatalog(std::move(defs));
}

}  // namespace lexkit::elements
