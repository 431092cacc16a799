#include "lexkit/rewards.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>

#include "lexkit/errors.hpp"
#include "lexkit/jsonl.hpp"
#include "lexkit/text.hpp"

namespace lexkit::rewards {

FormatSpec FormatSpec::from_json_file(const std::string& path) {
  const auto j = Json::parse(read_file(path));
  FormatSpec spec;
  spec.template_text = j.at("template_text").get<std::string>();
  spec.required_slots = j.at("required_slots").get<std::vector<std::string>>();
  if (j.contains("slot_patterns"))
    for (const auto& [k, v] : j["slot_patterns"].items())
      spec.slot_patterns[k] = v.get<std::string>();
  return spec;
}

void FormatSpec::to_json_file(const std::string& path) const {
  Json j;
  j["template_text"] = template_text;
  j["required_slots"] = required_slots;
  Json patterns = Json::object();
  for (const auto& [k, v] : slot_patterns) patterns[k] = v;
  j["slot_patterns"] = std::move(patterns);
  write_file(path, j.dump(2) + "\n");
}

FormatSpec FormatSpec::supervision_summary() {
  FormatSpec spec;
  spec.template_text =
      "When the party applies for supervision, their statement is: [applicant] believes that "
      "[court] People's Court's trial of [case information] has legal violations and requests "
      "the court to supervise it. This case has now concluded the review of the supervision. "
      "This court has reviewed the trial activities of [court] People's Court in the case of "
      "[case information]. The review has been completed. Now, it is clarified: In summary, "
      "according to Article [law article] of the Administrative Procedure Law of the People's "
      "Republic of China, we hereby issue this supervision decision:";
  spec.required_slots = {"applicant", "court", "case information", "law article"};
  spec.slot_patterns["law article"] = "[0-9〇一二三四五六七八九十百]+";
  return spec;
}

namespace {

struct TemplatePiece {
  bool is_slot = false;
  std::string value;  // literal text or slot name
};

std::vector<TemplatePiece> parse_template(const FormatSpec& spec) {
  std::vector<TemplatePiece> pieces;
  const std::string& tpl = spec.template_text;
  std::string literal;
  for (std::size_t i = 0; i < tpl.size();) {
    if (tpl[i] == '[') {
      const auto close = tpl.find(']', i + 1);
      if (close != std::string::npos) {
        const std::string name = tpl.substr(i + 1, close - i - 1);
        const bool known = std::find(spec.required_slots.begin(), spec.required_slots.end(),
                                     name) != spec.required_slots.end();
        if (!known)
          throw Error("template placeholder [" + name + "] not listed in required_slots");
        if (!literal.empty()) {
          pieces.push_back({false, literal});
          literal.clear();
        }
        pieces.push_back({true, name});
        i = close + 1;
        continue;
      }
    }
    literal.push_back(tpl[i]);
    ++i;
  }
  if (!literal.empty()) pieces.push_back({false, literal});
  return pieces;
}

std::string trim_copy(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

double format_reward(const std::string& output, const FormatSpec& spec) {
  if (spec.required_slots.empty()) return output.empty() ? 0.0 : 1.0;
  const auto pieces = parse_template(spec);

  // Sequential scan: each literal must appear after the previous one; the text
  // between consecutive literals is the value filled into the slot there.
  std::map<std::string, bool> slot_seen, slot_valid;
  for (const auto& name : spec.required_slots) {
    slot_seen[name] = false;
    slot_valid[name] = true;
  }

  std::size_t pos = 0;
  bool lost = false;  // a literal went missing; everything after is unmatched
  std::string pending_slot;
  std::size_t pending_start = 0;

  auto close_slot = [&](const std::string& name, std::size_t value_end) {
    const std::string value = trim_copy(output.substr(pending_start, value_end - pending_start));
    slot_seen[name] = true;
    bool ok = !value.empty() && value != "[" + name + "]";
    if (ok) {
      auto it = spec.slot_patterns.find(name);
      if (it != spec.slot_patterns.end())
        ok = std::regex_match(value, std::regex(it->second));
    }
    if (!ok) slot_valid[name] = false;
  };

  for (const auto& piece : pieces) {
    if (lost) {
      if (piece.is_slot) slot_valid[piece.value] = false, slot_seen[piece.value] = true;
      continue;
    }
    if (piece.is_slot) {
      pending_slot = piece.value;
      pending_start = pos;
      continue;
    }
    const auto found = output.find(piece.value, pos);
    if (found == std::string::npos) {
      if (!pending_slot.empty()) {
        slot_seen[pending_slot] = true;
        slot_valid[pending_slot] = false;
        pending_slot.clear();
      }
      lost = true;
      continue;
    }
    if (!pending_slot.empty()) {
      close_slot(pending_slot, found);
      pending_slot.clear();
    }
    pos = found + piece.value.size();
  }
  if (!pending_slot.empty() && !lost) close_slot(pending_slot, output.size());

  int valid = 0;
  for (const auto& name : spec.required_slots)
    if (slot_seen.at(name) && slot_valid.at(name)) ++valid;
  return double(valid) / double(spec.required_slots.size());
}

double garbled_penalty(const std::string& output, double lambda) {
  const auto cps = text::codepoints(output);
  if (cps.empty()) return 0.0;
  std::size_t bad = 0;
  for (char32_t cp : cps)
    if (!text::is_allowed_char(cp)) ++bad;
  return -lambda * double(bad) / double(cps.size());
}

double duplication_penalty(const std::string& output, const std::string& input, double lambda) {
  const std::size_t overlap = text::longest_common_substring(output, input);
  const double threshold = std::max(30.0, 0.5 * double(text::codepoint_count(output)));
  return double(overlap) > threshold ? -lambda : 0.0;
}

ProcessTask ProcessTask::from_json_file(const std::string& path) {
  const auto j = Json::parse(read_file(path));
  ProcessTask task;
  const auto markers = j.at("step_markers").get<std::vector<std::string>>();
  if (markers.size() != task.step_markers.size())
    throw Error("process task needs exactly 4 step markers");
  std::copy(markers.begin(), markers.end(), task.step_markers.begin());
  return task;
}

namespace {

std::vector<double> numbers_in(const std::string& s) {
  static const std::regex number_re("[0-9]+(\\.[0-9]+)?");
  std::vector<double> out;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), number_re);
       it != std::sregex_iterator(); ++it)
    out.push_back(std::stod(it->str()));
  return out;
}

}  // namespace

ProcessScore process_score(const std::string& output, const ProcessTask& task) {
  ProcessScore score;
  std::size_t cursor = 0;
  std::array<std::size_t, 4> marker_end{};  // one past each found marker
  std::array<bool, 4> found{};
  for (std::size_t k = 0; k < task.step_markers.size(); ++k) {
    const auto pos = output.find(task.step_markers[k], cursor);
    if (pos == std::string::npos) continue;
    found[k] = true;
    marker_end[k] = pos + task.step_markers[k].size();
    cursor = marker_end[k];
    ++score.markers_found;
  }
  score.total_marker_found = found[3];

  if (found[3]) {
    // Item values live between the value marker and the total marker; the
    // stated total is the first number after the total marker.
    const std::size_t values_begin = found[2] ? marker_end[2] : std::string::npos;
    const std::size_t total_pos = output.find(task.step_markers[3], found[2] ? marker_end[2] : 0);
    double item_sum = 0.0;
    bool have_items = false;
    if (values_begin != std::string::npos && total_pos != std::string::npos &&
        total_pos > values_begin) {
      for (double v : numbers_in(output.substr(values_begin, total_pos - values_begin))) {
        item_sum += v;
        have_items = true;
      }
    }
    const auto totals = numbers_in(output.substr(marker_end[3]));
    if (!have_items || totals.empty() || std::abs(totals.front() - item_sum) > 0.01)
      score.arithmetic_failed = true;
  }

  score.reward = 0.25 * score.markers_found;
  if (score.total_marker_found && score.arithmetic_failed) score.reward -= 0.25;
  score.reward = std::clamp(score.reward, 0.0, 1.0);
  return score;
}

double process_reward(const std::string& output, const ProcessTask& task) {
  return process_score(output, task).reward;
}

RewardBreakdown combined_reward(const std::string& output, const std::string& input,
                                const FormatSpec& spec, const ProcessTask& task,
                                const RewardWeights& weights) {
  if (weights.format < 0 || weights.garbled < 0 || weights.duplication < 0 ||
      weights.process < 0)
    throw Error("reward weights must be non-negative");
  RewardBreakdown out;
  const auto proc = process_score(output, task);
  out.components["format_conformance"] = weights.format * format_reward(output, spec);
  out.components["garbled_penalty"] =
      weights.garbled * garbled_penalty(output, weights.garbled_lambda);
  out.components["duplication_penalty"] =
      weights.duplication * duplication_penalty(output, input, weights.duplication_lambda);
  out.components["step_structure"] = weights.process * 0.25 * proc.markers_found;
  out.components["arithmetic_consistency"] =
      weights.process * (proc.total_marker_found && proc.arithmetic_failed ? -0.25 : 0.0);
  for (const auto& [name, value] : out.components) out.total += value;
  return out;
}

}  // namespace lexkit::rewards
