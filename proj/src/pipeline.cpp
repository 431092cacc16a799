#include "lexkit/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

#include "lexkit/augment.hpp"
#include "lexkit/corpus.hpp"
#include "lexkit/digest.hpp"
#include "lexkit/elements.hpp"
#include "lexkit/errors.hpp"
#include "lexkit/grpo.hpp"
#include "lexkit/metrics.hpp"
#include "lexkit/policy.hpp"
#include "lexkit/retrieve.hpp"
#include "lexkit/rewards.hpp"
#include "lexkit/rng.hpp"

namespace fs = std::filesystem;

namespace lexkit::pipeline {

namespace {

std::optional<std::string> opt_string(const Json& j, const char* key) {
  if (j.contains(key) && !j[key].is_null()) return j[key].get<std::string>();
  return std::nullopt;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const Json& j) {
  PipelineConfig c;
  c.snapshot = j;
  c.seed = j.value("seed", std::uint64_t(0));
  c.out_dir = j.value("out_dir", std::string("out"));
  if (j.contains("stages")) {
    const auto& s = j["stages"];
    c.run_corpus = s.value("corpus", true);
    c.run_augment = s.value("augment", true);
    c.run_sft = s.value("sft", true);
    c.run_grpo = s.value("grpo", true);
    c.run_retrieve = s.value("retrieve", true);
    c.run_eval = s.value("eval", true);
  }
  if (j.contains("corpus")) {
    const auto& s = j["corpus"];
    c.corpus.in_dir = s.value("in_dir", "");
    c.corpus.meta = s.value("meta", "");
    c.corpus.min_year = s.value("min_year", 2020);
    c.corpus.anchors_file = opt_string(s, "anchors");
  }
  if (j.contains("augment")) {
    const auto& s = j["augment"];
    c.augment.laws = s.value("laws", "");
    c.augment.num_qa = s.value("num_qa", 2);
    c.augment.template_id = s.value("template", "qa_generation");
    c.augment.templates_file = opt_string(s, "templates_file");
  }
  if (j.contains("sft")) {
    const auto& s = j["sft"];
    c.sft.data = opt_string(s, "data");
    c.sft.init = opt_string(s, "init");
    c.sft.steps = s.value("steps", 200);
    c.sft.lr = s.value("lr", 0.5);
    c.sft.grad_accum = s.value("grad_accum", 4);
    c.sft.max_vocab = s.value("max_vocab", 512);
  }
  if (j.contains("grpo")) {
    const auto& s = j["grpo"];
    c.grpo.ckpt = opt_string(s, "ckpt");
    c.grpo.reward = s.value("reward", "combined");
    c.grpo.query = s.value("query", "");
    c.grpo.group_size = s.value("G", 8);
    c.grpo.clip = s.value("eps", 0.2);
    c.grpo.kl_coef = s.value("beta", 0.01);
    c.grpo.lr = s.value("lr", 0.1);
    c.grpo.updates = s.value("updates", 50);
    c.grpo.max_len = s.value("max_len", 12);
    c.grpo.format_spec = opt_string(s, "format_spec");
    c.grpo.process_task = opt_string(s, "process_task");
  }
  if (j.contains("retrieve")) {
    const auto& s = j["retrieve"];
    c.retrieve.data = s.value("data", "");
    c.retrieve.max_chunk_tokens = s.value("max_chunk_tokens", 64);
    c.retrieve.top_k = s.value("topk", 1);
  }
  if (j.contains("eval")) {
    const auto& s = j["eval"];
    c.eval.gold = s.value("gold", "");
    c.eval.pred = s.value("pred", "");
  }
  if (j.contains("client")) c.timeout_ms = j["client"].value("timeout_ms", 10000);
  if (j.contains("embed")) c.embed_dim = j["embed"].value("dim", std::size_t(256));
  c.stub_clients = j.value("stub", true);
  c.catalog_file = opt_string(j, "catalog");
  return c;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  try {
    return from_json(Json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid(std::string("config parse error: ") + e.what());
  }
}

Json RunManifest::to_json() const {
  Json j;
  j["config"] = config;
  Json stage_arr = Json::array();
  for (const auto& stage : stages) {
    Json s;
    s["name"] = stage.name;
    s["seconds"] = stage.seconds;
    Json arts = Json::object();
    for (const auto& [file, digest] : stage.artifacts) arts[file] = digest;
    s["artifacts"] = std::move(arts);
    stage_arr.push_back(std::move(s));
  }
  j["stages"] = std::move(stage_arr);
  j["metrics"] = metrics;
  return j;
}

RunManifest RunManifest::from_json(const Json& j) {
  RunManifest m;
  m.config = j.value("config", Json::object());
  for (const auto& s : j.value("stages", Json::array())) {
    StageEntry entry;
    entry.name = s.value("name", "");
    entry.seconds = s.value("seconds", 0.0);
    if (s.contains("artifacts"))
      for (const auto& [file, digest] : s["artifacts"].items())
        entry.artifacts.emplace_back(file, digest.get<std::string>());
    m.stages.push_back(std::move(entry));
  }
  m.metrics = j.value("metrics", Json::object());
  return m;
}

void RunManifest::save(const std::string& path) const { write_file(path, to_json().dump(2) + "\n"); }

RunManifest RunManifest::load(const std::string& path) {
  return from_json(Json::parse(read_file(path)));
}

std::vector<std::pair<std::string, std::string>> RunManifest::artifact_digests() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& stage : stages)
    for (const auto& art : stage.artifacts) out.push_back(art);
  return out;
}

namespace {

struct StageRunner {
  const PipelineConfig& config;
  RunManifest& manifest;
  fs::path out_dir;

  template <typename Fn>
  void run(const std::string& name, bool enabled, Fn&& body) {
    if (!enabled) return;
    StageEntry entry;
    entry.name = name;
    const auto start = std::chrono::steady_clock::now();
    try {
      body(entry);
    } catch (const std::exception& e) {
      manifest.save((out_dir / "manifest.json").string());
      throw StageFailed(name, e.what());
    }
    entry.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.stages.push_back(std::move(entry));
  }

  void add_artifact(StageEntry& entry, const fs::path& path) {
    entry.artifacts.emplace_back(path.filename().string(), sha256_file(path.string()));
  }
};

elements::ElementCatalog load_catalog(const PipelineConfig& config) {
  return config.catalog_file ? elements::ElementCatalog::from_jsonl(*config.catalog_file)
                             : elements::starter_catalog();
}

grpo::RewardFn make_reward_fn(const std::string& kind, const rewards::FormatSpec& spec,
                              const rewards::ProcessTask& task) {
  if (kind == "format")
    return [spec](const std::string& out, const std::string&) {
      return rewards::format_reward(out, spec);
    };
  if (kind == "process")
    return [task](const std::string& out, const std::string&) {
      return rewards::process_reward(out, task);
    };
  if (kind == "combined")
    return [spec, task](const std::string& out, const std::string& in) {
      return rewards::combined_reward(out, in, spec, task).total;
    };
  throw ConfigInvalid("unknown reward kind: " + kind);
}

void validate_inputs(const PipelineConfig& config) {
  std::vector<std::pair<std::string, std::string>> required;  // (description, path)
  if (config.run_corpus) {
    required.emplace_back("corpus.in_dir", config.corpus.in_dir);
    required.emplace_back("corpus.meta", config.corpus.meta);
    if (config.corpus.anchors_file)
      required.emplace_back("corpus.anchors", *config.corpus.anchors_file);
  }
  if (config.run_augment) required.emplace_back("augment.laws", config.augment.laws);
  if (config.run_sft && !config.run_augment) {
    if (!config.sft.data) throw ConfigInvalid("sft.data required when augment stage is disabled");
    required.emplace_back("sft.data", *config.sft.data);
  }
  if (config.run_sft && config.sft.init) required.emplace_back("sft.init", *config.sft.init);
  if (config.run_grpo && !config.run_sft) {
    if (!config.grpo.ckpt) throw ConfigInvalid("grpo.ckpt required when sft stage is disabled");
    required.emplace_back("grpo.ckpt", *config.grpo.ckpt);
  }
  if (config.run_grpo && config.grpo.format_spec)
    required.emplace_back("grpo.format_spec", *config.grpo.format_spec);
  if (config.run_grpo && config.grpo.process_task)
    required.emplace_back("grpo.process_task", *config.grpo.process_task);
  if (config.run_retrieve) required.emplace_back("retrieve.data", config.retrieve.data);
  if (config.run_eval) {
    required.emplace_back("eval.gold", config.eval.gold);
    required.emplace_back("eval.pred", config.eval.pred);
  }
  if (config.catalog_file) required.emplace_back("catalog", *config.catalog_file);
  for (const auto& [what, path] : required) {
    if (path.empty()) throw ConfigInvalid(what + " is not set");
    if (!fs::exists(path)) throw ConfigInvalid(what + " does not exist: " + path);
  }
}

}  // namespace

RunManifest run_pipeline(const PipelineConfig& config) {
  validate_inputs(config);
  const fs::path out_dir(config.out_dir);
  fs::create_directories(out_dir);

  RunManifest manifest;
  manifest.config = config.snapshot.is_null() ? Json::object() : config.snapshot;
  StageRunner runner{config, manifest, out_dir};

  const auto catalog = load_catalog(config);
  const fs::path records_path = out_dir / "records.jsonl";
  const fs::path qa_path = out_dir / "qa.jsonl";
  const fs::path sft_ckpt = out_dir / "sft_ckpt.json";
  const fs::path sft_log = out_dir / "sft_log.csv";
  const fs::path grpo_ckpt = out_dir / "grpo_ckpt.json";
  const fs::path grpo_log = out_dir / "grpo_log.csv";
  const fs::path retrieval_csv = out_dir / "retrieval_report.csv";
  const fs::path metrics_csv = out_dir / "metrics_report.csv";
  const fs::path metrics_json = out_dir / "metrics_report.json";

  runner.run("corpus", config.run_corpus, [&](StageEntry& entry) {
    const auto anchors = config.corpus.anchors_file
                             ? corpus::AnchorSet::from_file(*config.corpus.anchors_file)
                             : corpus::AnchorSet::defaults();
    const auto stats = corpus::build_corpus(config.corpus.in_dir, config.corpus.meta,
                                            records_path.string(), config.corpus.min_year,
                                            anchors, catalog);
    manifest.metrics["corpus"] = {{"read", stats.read},
                                  {"kept", stats.kept},
                                  {"dropped_filter", stats.dropped_filter},
                                  {"dropped_no_anchors", stats.dropped_no_anchors}};
    runner.add_artifact(entry, records_path);
  });

  runner.run("augment", config.run_augment, [&](StageEntry& entry) {
    const auto templates = config.augment.templates_file
                               ? augment::TemplateCatalog::from_file(*config.augment.templates_file)
                               : augment::TemplateCatalog::builtin();
    clients::ClientConfig cc = clients::ClientConfig::from_env();
    cc.force_stub = config.stub_clients;
    cc.timeout_ms = config.timeout_ms;
    cc.stub_seed = derive_seed(config.seed, "augment");
    auto generator = clients::make_generator(cc);
    const auto stats =
        augment::run_augment(config.augment.laws, config.augment.num_qa, templates,
                             config.augment.template_id, *generator, qa_path.string());
    manifest.metrics["augment"] = {{"jobs", stats.jobs},
                                   {"pairs", stats.pairs},
                                   {"count_mismatches", stats.count_mismatches}};
    runner.add_artifact(entry, qa_path);
  });

  runner.run("sft", config.run_sft, [&](StageEntry& entry) {
    const std::string data_path = config.sft.data ? *config.sft.data : qa_path.string();
    std::vector<std::string> inputs, outputs;
    for (const auto& row : read_jsonl(data_path)) {
      inputs.push_back(row.at("input").get<std::string>());
      outputs.push_back(row.at("output").get<std::string>());
    }
    if (inputs.empty()) throw EmptyDataset("sft data is empty: " + data_path);

    policy::Dataset dataset;
    std::unique_ptr<policy::ToyPolicy> model;
    if (config.sft.init) {
      model = std::make_unique<policy::ToyPolicy>(policy::ToyPolicy::load(*config.sft.init));
    } else {
      std::vector<std::string> all_text;
      all_text.reserve(inputs.size() + outputs.size());
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        all_text.push_back(inputs[i]);
        all_text.push_back(outputs[i]);
      }
      model = std::make_unique<policy::ToyPolicy>(
          policy::Vocab::from_corpus(all_text, std::size_t(config.sft.max_vocab)));
    }
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      auto y = model->vocab().encode(outputs[i]);
      y.push_back(model->vocab().eos());
      dataset.emplace_back(model->vocab().encode(inputs[i]), std::move(y));
    }
    const auto log =
        policy::train_sft(*model, dataset, config.sft.steps, config.sft.lr, config.sft.grad_accum);
    model->save(sft_ckpt.string());
    write_file(sft_log.string(), log.to_csv());
    manifest.metrics["sft"] = {{"final_loss", log.loss.back()},
                               {"final_grad_norm", log.grad_norm.back()},
                               {"pairs", dataset.size()}};
    runner.add_artifact(entry, sft_ckpt);
    runner.add_artifact(entry, sft_log);
  });

  runner.run("grpo", config.run_grpo, [&](StageEntry& entry) {
    const std::string ckpt_path = config.grpo.ckpt ? *config.grpo.ckpt : sft_ckpt.string();
    auto model = policy::ToyPolicy::load(ckpt_path);
    const auto spec = config.grpo.format_spec
                          ? rewards::FormatSpec::from_json_file(*config.grpo.format_spec)
                          : rewards::FormatSpec::supervision_summary();
    const auto task = config.grpo.process_task
                          ? rewards::ProcessTask::from_json_file(*config.grpo.process_task)
                          : rewards::ProcessTask{};
    grpo::GrpoConfig gc;
    gc.group_size = config.grpo.group_size;
    gc.clip = config.grpo.clip;
    gc.kl_coef = config.grpo.kl_coef;
    gc.lr = config.grpo.lr;
    gc.updates = config.grpo.updates;
    gc.max_len = config.grpo.max_len;
    gc.seed = derive_seed(config.seed, "grpo");
    const std::vector<policy::TokenSeq> queries = {model.vocab().encode(config.grpo.query)};
    const auto log = grpo::train_grpo(model, queries,
                                      make_reward_fn(config.grpo.reward, spec, task), gc);
    model.save(grpo_ckpt.string());
    write_file(grpo_log.string(), log.to_csv());
    manifest.metrics["grpo"] = {{"final_objective", log.objective.back()},
                                {"final_mean_reward", log.mean_reward.back()},
                                {"final_kl", log.kl.back()}};
    runner.add_artifact(entry, grpo_ckpt);
    runner.add_artifact(entry, grpo_log);
  });

  runner.run("retrieve", config.run_retrieve, [&](StageEntry& entry) {
    clients::HashingEmbedder embedder(config.embed_dim);
    const auto docs = retrieve::load_labeled_docs(config.retrieve.data);
    const auto report =
        retrieve::compare_augmentation(docs, catalog, embedder, config.retrieve.max_chunk_tokens);
    write_file(retrieval_csv.string(), report.to_csv());
    manifest.metrics["retrieval"] = {{"mean_original", report.mean_original},
                                     {"mean_augmented", report.mean_augmented},
                                     {"docs", report.rows.size()}};
    runner.add_artifact(entry, retrieval_csv);
  });

  runner.run("eval", config.run_eval, [&](StageEntry& entry) {
    std::vector<metrics::ExtractionCounts> counts;
    std::vector<std::string> labels;
    std::map<std::string, metrics::SlotMap> pred_by_id;
    for (const auto& row : read_jsonl(config.eval.pred)) {
      metrics::SlotMap slots;
      for (const auto& [name, value] : row.at("elements").items())
        slots[name] = elements::canonicalize_raw(catalog, name,
                                                 value.is_string() ? value.get<std::string>()
                                                                   : value.dump());
      pred_by_id[row.at("id").get<std::string>()] = std::move(slots);
    }
    for (const auto& row : read_jsonl(config.eval.gold)) {
      metrics::SlotMap gold;
      for (const auto& [name, value] : row.at("elements").items())
        gold[name] = elements::canonicalize_raw(catalog, name,
                                                value.is_string() ? value.get<std::string>()
                                                                  : value.dump());
      const auto id = row.at("id").get<std::string>();
      const auto it = pred_by_id.find(id);
      counts.push_back(metrics::extraction_counts(gold, it == pred_by_id.end()
                                                            ? metrics::SlotMap{}
                                                            : it->second));
      labels.push_back(row.value("group", ""));
    }
    const auto rows = metrics::aggregate_by_group(counts, labels);
    write_file(metrics_csv.string(), metrics::report_csv(rows));
    write_file(metrics_json.string(), metrics::report_json(rows));
    Json table = Json::array();
    for (const auto& row : rows)
      table.push_back({{"group", row.group},
                       {"accuracy", row.accuracy},
                       {"recall", row.recall},
                       {"precision", row.precision},
                       {"f1", row.f1}});
    manifest.metrics["extraction"] = std::move(table);
    runner.add_artifact(entry, metrics_csv);
    runner.add_artifact(entry, metrics_json);
  });

  manifest.save((out_dir / "manifest.json").string());
  return manifest;
}

ReportFiles emit_report(const RunManifest& manifest) {
  ReportFiles files;
  std::ostringstream text;
  text << "pipeline run report\n";
  text << "===================\n\n";
  text << "stages completed: " << manifest.stages.size() << "\n";
  for (const auto& stage : manifest.stages) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", stage.seconds);
    text << "  " << stage.name << " (" << buf << "s)";
    for (const auto& [file, digest] : stage.artifacts)
      text << "\n    " << file << "  sha256:" << digest.substr(0, 12);
    text << "\n";
  }

  std::vector<metrics::ExtractionScore> rows;
  if (manifest.metrics.contains("extraction")) {
    for (const auto& row : manifest.metrics["extraction"]) {
      metrics::ExtractionScore s;
      s.group = row.value("group", "");
      s.accuracy = row.value("accuracy", 0.0);
      s.recall = row.value("recall", 0.0);
      s.precision = row.value("precision", 0.0);
      s.f1 = row.value("f1", 0.0);
      rows.push_back(std::move(s));
    }
  }
  files.csv = metrics::report_csv(rows);

  if (!rows.empty()) {
    text << "\nextraction scores (x100)\n";
    text << "group            accuracy  recall  precision  f1\n";
    for (const auto& row : rows) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%-16s %8.1f %7.1f %10.1f %5.1f", row.group.c_str(),
                    row.accuracy * 100.0, row.recall * 100.0, row.precision * 100.0,
                    row.f1 * 100.0);
      text << buf << "\n";
    }
  }
  if (manifest.metrics.contains("retrieval")) {
    const auto& r = manifest.metrics["retrieval"];
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%.4f / %.4f", r.value("mean_original", 0.0),
                  r.value("mean_augmented", 0.0));
    text << "\nretrieval overlap accuracy (original / augmented): " << buf << "\n";
  }
  files.text = text.str();
  return files;
}

}  // namespace lexkit::pipeline
