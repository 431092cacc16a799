#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

namespace lexkit::rewards {

// A document template whose [name] placeholders must be filled, in order, for
// an output to conform.
struct FormatSpec {
  std::string template_text;
  std::vector<std::string> required_slots;
  std::map<std::string, std::string> slot_patterns;  // full-match regex per slot

  static FormatSpec from_json_file(const std::string& path);
  void to_json_file(const std::string& path) const;

  // The supervision-decision summary template shipped with the toolkit.
  static FormatSpec supervision_summary();
};

// Fraction of required slots that are present, non-empty, pattern-valid and in
// template order. Full conformance scores 1.
double format_reward(const std::string& output, const FormatSpec& spec);

// -lambda * fraction of characters outside the allowed repertoire (CJK
// ideographs, CJK punctuation, printable ASCII); U+FFFD always counts.
double garbled_penalty(const std::string& output, double lambda = 1.0);

// -lambda when the longest common substring of output and input exceeds
// max(30 chars, half the output length); 0 otherwise.
double duplication_penalty(const std::string& output, const std::string& input,
                           double lambda = 0.5);

// The four reasoning-step markers expected in an amount-extraction answer:
// incident count, per-incident items, per-item values, stated total.
struct ProcessTask {
  std::array<std::string, 4> step_markers = {"抢劫次数", "被抢物品", "物品价值", "总金额"};

  static ProcessTask from_json_file(const std::string& path);
};

struct ProcessScore {
  int markers_found = 0;        // found in order
  bool total_marker_found = false;
  bool arithmetic_failed = false;  // total stated but != sum of item values
  double reward = 0.0;             // 0.25 per marker, total credit gated
};

ProcessScore process_score(const std::string& output, const ProcessTask& task);

// 0.25 per step marker found in order; the total-step credit is withheld when
// the stated total differs from the sum of stated item values by > 0.01.
double process_reward(const std::string& output, const ProcessTask& task);

struct RewardWeights {
  double format = 1.0;
  double garbled = 1.0;
  double duplication = 1.0;
  double process = 1.0;
  double garbled_lambda = 1.0;
  double duplication_lambda = 0.5;
};

struct RewardBreakdown {
  double total = 0.0;
  // format_conformance, garbled_penalty, duplication_penalty, step_structure,
  // arithmetic_consistency; components sum to total.
  std::map<std::string, double> components;
};

RewardBreakdown combined_reward(const std::string& output, const std::string& input,
                                const FormatSpec& spec, const ProcessTask& task,
                                const RewardWeights& weights = {});

}  // namespace lexkit::rewards
