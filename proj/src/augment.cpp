#include "lexkit/augment.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <json.hpp>

#include "lexkit/errors.hpp"
#include "lexkit/jsonl.hpp"

namespace lexkit::augment {

namespace {

const char* kQaGenerationTemplate =
    "A conversation between User and Assistant. The user asks a question, and the Assistant "
    "solves it.\n"
    "I am fine-tuning a large legal model and need to generate some question-answer pairs (QA) "
    "based on legal text as data enhancement.\n"
    "The following is a piece of legal text: {prompt}\n"
    "Please generate {num_qa} high-quality question-answer pairs (QA) based on this text. Both "
    "the questions and answers are required to be based on the text content, and the questions "
    "should cover the key legal concepts, clauses, or principles in the text.\n"
    "\n"
    "The sample format is as follows:\n"
    "{\n"
    "  \"input\": \"What is Article 96 of the Civil Code?\",\n"
    "  \"output\": \"The legal persons of institutions......\"\n"
    "}\n"
    "\n"
    "Please ensure that the generated QA pairs meet the following requirements:\n"
    "1. The questions are clear, and the answers are accurate and directly derived from the "
    "text.\n"
    "2. Question types may include definitions, interpretation of terms, scope of application, "
    "legal liability, etc.\n"
    "3. The answer should be as concise as possible and avoid redundant information.\n"
    "\n"
    "Please return the QA pair in the following format:\n"
    "[ { \"input\": \"Question 1\", \"output\": \"Answer 1\" }, ... ]\n";

bool is_placeholder_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Positions of {name} placeholders in a template.
struct Placeholder {
  std::size_t begin;  // position of '{'
  std::size_t end;    // one past '}'
  std::string name;
};

std::vector<Placeholder> find_placeholders(const std::string& tpl) {
  std::vector<Placeholder> out;
  for (std::size_t i = 0; i < tpl.size(); ++i) {
    if (tpl[i] != '{') continue;
    std::size_t j = i + 1;
    while (j < tpl.size() && is_placeholder_char(tpl[j])) ++j;
    if (j > i + 1 && j < tpl.size() && tpl[j] == '}' &&
        !std::isdigit(static_cast<unsigned char>(tpl[i + 1]))) {
      out.push_back({i, j + 1, tpl.substr(i + 1, j - i - 1)});
      i = j;
    }
  }
  return out;
}

std::string normalize_ws(const std::string& s) {
  std::string out;
  bool in_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out.push_back(' ');
    in_space = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace

TemplateCatalog TemplateCatalog::builtin() {
  TemplateCatalog cat;
  cat.add("qa_generation", kQaGenerationTemplate);
  return cat;
}

TemplateCatalog TemplateCatalog::from_file(const std::string& path) {
  TemplateCatalog cat = builtin();
  const auto j = Json::parse(read_file(path));
  for (const auto& [id, text] : j.items()) cat.add(id, text.get<std::string>());
  return cat;
}

const std::string* TemplateCatalog::find(const std::string& id) const {
  auto it = templates_.find(id);
  return it == templates_.end() ? nullptr : &it->second;
}

void TemplateCatalog::add(const std::string& id, const std::string& text) {
  templates_[id] = text;
}

std::string render_prompt(const AugmentJob& job, const TemplateCatalog& catalog) {
  if (job.num_qa < 1) throw Error("num_qa must be >= 1");
  const std::string* tpl = catalog.find(job.template_id);
  if (tpl == nullptr) throw UnknownTemplate("unknown template: " + job.template_id);

  const auto placeholders = find_placeholders(*tpl);
  for (const auto& p : placeholders)
    if (p.name != "prompt" && p.name != "num_qa")
      throw UnresolvedPlaceholder("unresolved placeholder {" + p.name + "}");

  std::string out;
  out.reserve(tpl->size() + job.legal_text.size());
  std::size_t cursor = 0;
  for (const auto& p : placeholders) {
    out.append(*tpl, cursor, p.begin - cursor);
    out += p.name == "prompt" ? job.legal_text : std::to_string(job.num_qa);
    cursor = p.end;
  }
  out.append(*tpl, cursor, tpl->size() - cursor);
  return out;
}

namespace {

// Balanced ']' for the '[' at `start`, honoring JSON strings and escapes.
std::size_t matching_bracket(const std::string& s, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\')
        ++i;
      else if (c == '"')
        in_string = false;
      continue;
    }
    if (c == '"')
      in_string = true;
    else if (c == '[' || c == '{')
      ++depth;
    else if (c == ']' || c == '}') {
      --depth;
      if (depth == 0 && c == ']') return i;
      if (depth < 0) return std::string::npos;
    }
  }
  return std::string::npos;
}

}  // namespace

ParseResult parse_qa(const std::string& response, int expected) {
  std::optional<ParseResult> fallback;  // first parseable array yielding no pairs

  for (std::size_t i = 0; i < response.size(); ++i) {
    if (response[i] != '[') continue;
    const std::size_t close = matching_bracket(response, i);
    if (close == std::string::npos) continue;
    nlohmann::json arr;
    try {
      arr = nlohmann::json::parse(response.substr(i, close - i + 1));
    } catch (const nlohmann::json::exception&) {
      continue;
    }
    if (!arr.is_array()) continue;

    ParseResult result;
    result.diagnostics.expected = expected;
    std::set<std::string> seen_questions;
    for (const auto& entry : arr) {
      if (!entry.is_object() || !entry.contains("input") || !entry.contains("output") ||
          !entry["input"].is_string() || !entry["output"].is_string()) {
        ++result.diagnostics.dropped_malformed;
        continue;
      }
      QAPair pair{entry["input"].get<std::string>(), entry["output"].get<std::string>(), {}};
      if (normalize_ws(pair.input).empty() || normalize_ws(pair.output).empty()) {
        ++result.diagnostics.dropped_empty_field;
        continue;
      }
      if (!seen_questions.insert(normalize_ws(pair.input)).second) {
        ++result.diagnostics.dropped_duplicate;
        continue;
      }
      result.pairs.push_back(std::move(pair));
    }
    result.diagnostics.got = static_cast<int>(result.pairs.size());
    result.diagnostics.count_mismatch = result.diagnostics.got != expected;
    if (!result.pairs.empty()) return result;
    if (!fallback) fallback = std::move(result);
  }
  if (fallback) return *fallback;
  throw NoParsableArray("no parsable QA array in response");
}

RunStats run_augment(const std::string& laws_path, int num_qa, const TemplateCatalog& templates,
                     const std::string& template_id, clients::TextGenerator& generator,
                     const std::string& out_path) {
  RunStats stats;
  std::vector<Json> out_rows;
  for (const auto& row : read_jsonl(laws_path)) {
    AugmentJob job;
    job.legal_text = row.at("text").get<std::string>();
    job.num_qa = num_qa;
    job.template_id = template_id;
    const std::string article_id = row.value("id", "");

    clients::GenerationRequest req;
    req.prompt = render_prompt(job, templates);
    req.max_tokens = 1024;
    const auto parsed = parse_qa(generator.generate(req), num_qa);

    ++stats.jobs;
    if (parsed.diagnostics.count_mismatch) ++stats.count_mismatches;
    for (const auto& pair : parsed.pairs) {
      Json out;
      out["input"] = pair.input;
      out["output"] = pair.output;
      out["source_article"] = article_id;
      out_rows.push_back(std::move(out));
      ++stats.pairs;
    }
  }
  write_jsonl(out_path, out_rows);
  return stats;
}

}  // namespace lexkit::augment
