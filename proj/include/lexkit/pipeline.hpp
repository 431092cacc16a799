#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lexkit/jsonl.hpp"

namespace lexkit::pipeline {

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::string out_dir = "out";

  bool run_corpus = true;
  bool run_augment = true;
  bool run_sft = true;
  bool run_grpo = true;
  bool run_retrieve = true;
  bool run_eval = true;

  struct {
    std::string in_dir;
    std::string meta;
    int min_year = 2020;
    std::optional<std::string> anchors_file;
  } corpus;

  struct {
    std::string laws;
    int num_qa = 2;
    std::string template_id = "qa_generation";
    std::optional<std::string> templates_file;
  } augment;

  struct {
    std::optional<std::string> data;  // default: the augment stage's output
    std::optional<std::string> init;  // optional checkpoint to continue from
    int steps = 200;
    double lr = 0.5;
    int grad_accum = 4;
    int max_vocab = 512;
  } sft;

  struct {
    std::optional<std::string> ckpt;  // default: the sft stage's output
    std::string reward = "combined";  // format | process | combined
    std::string query;                // encoded against the checkpoint vocab
    int group_size = 8;
    double clip = 0.2;
    double kl_coef = 0.01;
    double lr = 0.1;
    int updates = 50;
    int max_len = 12;
    std::optional<std::string> format_spec;
    std::optional<std::string> process_task;
  } grpo;

  struct {
    std::string data;  // labeled docs JSONL
    int max_chunk_tokens = 64;
    int top_k = 1;
  } retrieve;

  struct {
    std::string gold;
    std::string pred;
  } eval;

  std::optional<std::string> catalog_file;  // default: the starter catalog
  bool stub_clients = true;
  std::size_t embed_dim = 256;
  int timeout_ms = 10000;

  Json snapshot;  // raw config as loaded, recorded in the manifest

  static PipelineConfig from_json(const Json& j);
  static PipelineConfig from_file(const std::string& path);
};

struct StageEntry {
  std::string name;
  double seconds = 0.0;
  std::vector<std::pair<std::string, std::string>> artifacts;  // filename -> sha256
};

struct RunManifest {
  Json config;
  std::vector<StageEntry> stages;
  Json metrics = Json::object();

  Json to_json() const;
  static RunManifest from_json(const Json& j);
  void save(const std::string& path) const;
  static RunManifest load(const std::string& path);

  // filename -> digest over all stages.
  std::vector<std::pair<std::string, std::string>> artifact_digests() const;
};

// Executes the enabled stages in order. Throws ConfigInvalid before any stage
// runs when a required external input is missing; a stage failure writes the
// partial manifest to out_dir/manifest.json and throws StageFailed.
RunManifest run_pipeline(const PipelineConfig& config);

struct ReportFiles {
  std::string text;  // human-readable summary
  std::string csv;   // extraction table, scores x100
};

// Pure function of the manifest: regenerating from a saved manifest is
// byte-identical.
ReportFiles emit_report(const RunManifest& manifest);

}  // namespace lexkit::pipeline
