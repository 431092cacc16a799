#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "lexkit/augment.hpp"
#include "lexkit/corpus.hpp"
#include "lexkit/elements.hpp"
#include "lexkit/errors.hpp"
#include "lexkit/grpo.hpp"
#include "lexkit/jsonl.hpp"
#include "lexkit/metrics.hpp"
#include "lexkit/pipeline.hpp"
#include "lexkit/policy.hpp"
#include "lexkit/retrieve.hpp"
#include "lexkit/rewards.hpp"
#include "lexkit/rng.hpp"

namespace {

using namespace lexkit;

elements::ElementCatalog catalog_or_starter(const std::string& path) {
  return path.empty() ? elements::starter_catalog() : elements::ElementCatalog::from_jsonl(path);
}

int run(int argc, char** argv) {
  CLI::App app{"Legal-LLM adaptation toolkit: corpus building, QA augmentation, "
               "SFT/GRPO training on an analytic policy, retrieval matching, and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();  // --seed / --stub may appear after the subcommand

  std::uint64_t seed = 0;
  bool stub = false;
  app.add_option("--seed", seed, "global random seed");
  app.add_flag("--stub", stub, "force offline stub clients");

  // corpus build
  auto* corpus_cmd = app.add_subcommand("corpus", "corpus operations")->require_subcommand(1);
  auto* corpus_build = corpus_cmd->add_subcommand("build", "extract sections and emit records");
  std::string cb_in, cb_meta, cb_out, cb_anchors, cb_catalog;
  int cb_min_year = 2020;
  corpus_build->add_option("--in", cb_in, "directory of <id>.txt documents")->required();
  corpus_build->add_option("--meta", cb_meta, "metadata JSONL sidecar")->required();
  corpus_build->add_option("--out", cb_out, "output records JSONL")->required();
  corpus_build->add_option("--min-year", cb_min_year, "earliest year kept");
  corpus_build->add_option("--anchors", cb_anchors, "anchor phrases file, one per line");
  corpus_build->add_option("--catalog", cb_catalog, "element catalog JSONL");
  corpus_build->callback([&] {
    const auto anchors =
        cb_anchors.empty() ? corpus::AnchorSet::defaults() : corpus::AnchorSet::from_file(cb_anchors);
    const auto stats = corpus::build_corpus(cb_in, cb_meta, cb_out, cb_min_year, anchors,
                                            catalog_or_starter(cb_catalog));
    std::cout << "read=" << stats.read << " kept=" << stats.kept
              << " dropped_filter=" << stats.dropped_filter
              << " dropped_no_anchors=" << stats.dropped_no_anchors << "\n";
  });

  // catalog init
  auto* catalog_cmd = app.add_subcommand("catalog", "element catalog operations")->require_subcommand(1);
  auto* catalog_init = catalog_cmd->add_subcommand("init", "write the starter catalog");
  std::string ci_out;
  catalog_init->add_option("--out", ci_out, "output catalog JSONL")->required();
  catalog_init->callback([&] {
    elements::starter_catalog().to_jsonl(ci_out);
    std::cout << "wrote " << ci_out << "\n";
  });

  // augment run
  auto* augment_cmd = app.add_subcommand("augment", "QA augmentation")->require_subcommand(1);
  auto* augment_run = augment_cmd->add_subcommand("run", "generate QA pairs from legal articles");
  std::string ar_catalog, ar_laws, ar_out, ar_template = "qa_generation";
  int ar_num_qa = 3;
  augment_run->add_option("--catalog", ar_catalog, "prompt-template catalog JSON");
  augment_run->add_option("--laws", ar_laws, "articles JSONL with {id, text}")->required();
  augment_run->add_option("--num-qa", ar_num_qa, "QA pairs per article");
  augment_run->add_option("--out", ar_out, "output QA JSONL")->required();
  augment_run->add_option("--template", ar_template, "template id");
  augment_run->callback([&] {
    const auto templates = ar_catalog.empty() ? augment::TemplateCatalog::builtin()
                                              : augment::TemplateCatalog::from_file(ar_catalog);
    auto cc = clients::ClientConfig::from_env();
    cc.force_stub = stub;
    cc.stub_seed = seed;
    auto generator = clients::make_generator(cc);
    const auto stats =
        augment::run_augment(ar_laws, ar_num_qa, templates, ar_template, *generator, ar_out);
    std::cout << "jobs=" << stats.jobs << " pairs=" << stats.pairs
              << " count_mismatches=" << stats.count_mismatches << "\n";
  });

  // train sft / grpo
  auto* train_cmd = app.add_subcommand("train", "policy training")->require_subcommand(1);

  auto* train_sft_cmd = train_cmd->add_subcommand("sft", "supervised fine-tuning");
  std::string ts_data, ts_out, ts_init, ts_log;
  int ts_steps = 200, ts_accum = 1, ts_max_vocab = 512;
  double ts_lr = 0.5;
  train_sft_cmd->add_option("--data", ts_data, "QA JSONL with {input, output}")->required();
  train_sft_cmd->add_option("--steps", ts_steps, "gradient steps");
  train_sft_cmd->add_option("--lr", ts_lr, "learning rate");
  train_sft_cmd->add_option("--accum", ts_accum, "gradient accumulation micro-batches");
  train_sft_cmd->add_option("--out", ts_out, "output checkpoint")->required();
  train_sft_cmd->add_option("--init", ts_init, "checkpoint to continue from (for chained SFT)");
  train_sft_cmd->add_option("--max-vocab", ts_max_vocab, "vocab cap when building from data");
  train_sft_cmd->add_option("--log", ts_log, "training curve CSV (step,loss,grad_norm)");
  train_sft_cmd->callback([&] {
    std::vector<std::string> inputs, outputs;
    for (const auto& row : read_jsonl(ts_data)) {
      inputs.push_back(row.at("input").get<std::string>());
      outputs.push_back(row.at("output").get<std::string>());
    }
    std::unique_ptr<policy::ToyPolicy> model;
    if (!ts_init.empty()) {
      model = std::make_unique<policy::ToyPolicy>(policy::ToyPolicy::load(ts_init));
    } else {
      std::vector<std::string> all_text;
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        all_text.push_back(inputs[i]);
        all_text.push_back(outputs[i]);
      }
      model = std::make_unique<policy::ToyPolicy>(
          policy::Vocab::from_corpus(all_text, std::size_t(ts_max_vocab)));
    }
    policy::Dataset dataset;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      auto y = model->vocab().encode(outputs[i]);
      y.push_back(model->vocab().eos());
      dataset.emplace_back(model->vocab().encode(inputs[i]), std::move(y));
    }
    const auto log = policy::train_sft(*model, dataset, ts_steps, ts_lr, ts_accum);
    model->save(ts_out);
    if (!ts_log.empty()) write_file(ts_log, log.to_csv());
    std::cout << "final_loss=" << log.loss.back() << " final_grad_norm=" << log.grad_norm.back()
              << "\n";
  });

  auto* train_grpo_cmd = train_cmd->add_subcommand("grpo", "group-relative policy optimization");
  std::string tg_ckpt, tg_out, tg_reward = "combined", tg_format_spec, tg_process_task, tg_log,
              tg_query;
  int tg_G = 8, tg_updates = 1000, tg_max_len = 12;
  double tg_eps = 0.2, tg_beta = 0.01, tg_lr = 0.1;
  train_grpo_cmd->add_option("--ckpt", tg_ckpt, "input checkpoint")->required();
  train_grpo_cmd->add_option("--reward", tg_reward, "format | process | combined");
  train_grpo_cmd->add_option("--G", tg_G, "group size");
  train_grpo_cmd->add_option("--eps", tg_eps, "clip radius");
  train_grpo_cmd->add_option("--beta", tg_beta, "KL coefficient");
  train_grpo_cmd->add_option("--lr", tg_lr, "learning rate");
  train_grpo_cmd->add_option("--updates", tg_updates, "policy updates");
  train_grpo_cmd->add_option("--out", tg_out, "output checkpoint")->required();
  train_grpo_cmd->add_option("--format-spec", tg_format_spec, "FormatSpec JSON file");
  train_grpo_cmd->add_option("--process-task", tg_process_task, "ProcessTask JSON file");
  train_grpo_cmd->add_option("--max-len", tg_max_len, "max sampled tokens");
  train_grpo_cmd->add_option("--query", tg_query, "query text (encoded with the vocab)");
  train_grpo_cmd->add_option("--log", tg_log, "training curve CSV (step,objective,mean_reward,kl)");
  train_grpo_cmd->callback([&] {
    auto model = policy::ToyPolicy::load(tg_ckpt);
    const auto spec = tg_format_spec.empty() ? rewards::FormatSpec::supervision_summary()
                                             : rewards::FormatSpec::from_json_file(tg_format_spec);
    const auto task = tg_process_task.empty() ? rewards::ProcessTask{}
                                              : rewards::ProcessTask::from_json_file(tg_process_task);
    grpo::GrpoConfig gc;
    gc.group_size = tg_G;
    gc.clip = tg_eps;
    gc.kl_coef = tg_beta;
    gc.lr = tg_lr;
    gc.updates = tg_updates;
    gc.max_len = tg_max_len;
    gc.seed = seed;
    grpo::RewardFn reward_fn;
    if (tg_reward == "format")
      reward_fn = [&](const std::string& o, const std::string&) {
        return rewards::format_reward(o, spec);
      };
    else if (tg_reward == "process")
      reward_fn = [&](const std::string& o, const std::string&) {
        return rewards::process_reward(o, task);
      };
    else
      reward_fn = [&](const std::string& o, const std::string& i) {
        return rewards::combined_reward(o, i, spec, task).total;
      };
    const std::vector<policy::TokenSeq> queries = {model.vocab().encode(tg_query)};
    const auto log = grpo::train_grpo(model, queries, reward_fn, gc);
    model.save(tg_out);
    if (!tg_log.empty()) write_file(tg_log, log.to_csv());
    std::cout << "final_objective=" << log.objective.back()
              << " final_mean_reward=" << log.mean_reward.back() << " final_kl=" << log.kl.back()
              << "\n";
  });

  // retrieve match / eval
  auto* retrieve_cmd = app.add_subcommand("retrieve", "retrieval-based augmentation")
                           ->require_subcommand(1);

  auto* retrieve_match = retrieve_cmd->add_subcommand("match", "match chunks to elements");
  std::string rm_doc, rm_catalog;
  bool rm_augmented = false;
  int rm_topk = 1, rm_chunk = 512;
  retrieve_match->add_option("--doc", rm_doc, "document text file")->required();
  retrieve_match->add_option("--catalog", rm_catalog, "element catalog JSONL");
  retrieve_match->add_flag("--augmented", rm_augmented, "use augmented descriptions");
  retrieve_match->add_option("--topk", rm_topk, "matches per chunk");
  retrieve_match->add_option("--max-chunk-tokens", rm_chunk, "chunk size in tokens");
  retrieve_match->callback([&] {
    const auto catalog = catalog_or_starter(rm_catalog);
    clients::HashingEmbedder embedder;
    const auto doc = read_file(rm_doc);
    const auto chunks = retrieve::chunk_text(doc, rm_chunk);
    const auto matches = retrieve::match_elements(chunks, catalog, embedder, rm_augmented, rm_topk);
    for (const auto& m : matches) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.4f", m.cosine);
      std::cout << "chunk " << m.chunk_index << " -> " << m.element_name << " (cos " << buf
                << ")\n";
    }
    const auto context = retrieve::build_context(doc, matches);
    std::cout << "matched elements:";
    for (const auto& name : context.matched_elements) std::cout << ' ' << name;
    std::cout << "\n";
  });

  auto* retrieve_eval = retrieve_cmd->add_subcommand("eval", "overlap accuracy report");
  std::string re_data, re_catalog, re_out;
  int re_chunk = 512;
  retrieve_eval->add_option("--data", re_data, "labeled docs JSONL")->required();
  retrieve_eval->add_option("--catalog", re_catalog, "element catalog JSONL");
  retrieve_eval->add_option("--out", re_out, "report CSV")->required();
  retrieve_eval->add_option("--max-chunk-tokens", re_chunk, "chunk size in tokens");
  retrieve_eval->callback([&] {
    const auto catalog = catalog_or_starter(re_catalog);
    clients::HashingEmbedder embedder;
    const auto docs = retrieve::load_labeled_docs(re_data);
    const auto report = retrieve::compare_augmentation(docs, catalog, embedder, re_chunk);
    write_file(re_out, report.to_csv());
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f / %.4f", report.mean_original, report.mean_augmented);
    std::cout << "mean overlap (original / augmented): " << buf << "\n";
  });

  // eval run
  auto* eval_cmd = app.add_subcommand("eval", "extraction scoring")->require_subcommand(1);
  auto* eval_run = eval_cmd->add_subcommand("run", "score predictions against gold");
  std::string ev_gold, ev_pred, ev_out, ev_catalog;
  eval_run->add_option("--gold", ev_gold, "gold JSONL with {id, group, elements}")->required();
  eval_run->add_option("--pred", ev_pred, "pred JSONL with {id, elements}")->required();
  eval_run->add_option("--out", ev_out, "report path prefix (.csv/.json appended)")->required();
  eval_run->add_option("--catalog", ev_catalog, "element catalog JSONL");
  eval_run->callback([&] {
    const auto catalog = catalog_or_starter(ev_catalog);
    std::map<std::string, metrics::SlotMap> pred_by_id;
    for (const auto& row : read_jsonl(ev_pred)) {
      metrics::SlotMap slots;
      for (const auto& [name, value] : row.at("elements").items())
        slots[name] = elements::canonicalize_raw(
            catalog, name, value.is_string() ? value.get<std::string>() : value.dump());
      pred_by_id[row.at("id").get<std::string>()] = std::move(slots);
    }
    std::vector<metrics::ExtractionCounts> counts;
    std::vector<std::string> labels;
    for (const auto& row : read_jsonl(ev_gold)) {
      metrics::SlotMap gold;
      for (const auto& [name, value] : row.at("elements").items())
        gold[name] = elements::canonicalize_raw(
            catalog, name, value.is_string() ? value.get<std::string>() : value.dump());
      const auto it = pred_by_id.find(row.at("id").get<std::string>());
      counts.push_back(metrics::extraction_counts(
          gold, it == pred_by_id.end() ? metrics::SlotMap{} : it->second));
      labels.push_back(row.value("group", ""));
    }
    const auto rows = metrics::aggregate_by_group(counts, labels);
    write_file(ev_out + ".csv", metrics::report_csv(rows));
    write_file(ev_out + ".json", metrics::report_json(rows));
    std::cout << metrics::report_csv(rows);
  });

  auto* eval_rouge = eval_cmd->add_subcommand("rouge", "ROUGE and embedding scores on text pairs");
  std::string er_pairs, er_out;
  eval_rouge->add_option("--pairs", er_pairs, "JSONL with {candidate, reference}")->required();
  eval_rouge->add_option("--out", er_out, "report CSV")->required();
  eval_rouge->callback([&] {
    clients::HashingEmbedder embedder;
    std::ostringstream csv;
    csv << "r1_recall,r1_precision,r1_f1,r2_recall,r2_precision,r2_f1,"
           "rl_recall,rl_precision,rl_f1,embed_recall,embed_precision,embed_f1\n";
    double mean[12] = {};
    std::size_t rows = 0;
    char buf[32];
    auto put = [&](double v, bool last) {
      std::snprintf(buf, sizeof(buf), "%.4f", v);
      csv << buf << (last ? '\n' : ',');
    };
    for (const auto& row : read_jsonl(er_pairs)) {
      const auto triple = metrics::rouge(row.at("candidate").get<std::string>(),
                                         row.at("reference").get<std::string>());
      const auto emb = metrics::embed_score(row.at("candidate").get<std::string>(),
                                            row.at("reference").get<std::string>(), embedder);
      const double values[12] = {triple.r1.recall, triple.r1.precision, triple.r1.f1,
                                 triple.r2.recall, triple.r2.precision, triple.r2.f1,
                                 triple.rl.recall, triple.rl.precision, triple.rl.f1,
                                 emb.recall,       emb.precision,       emb.f1};
      for (int i = 0; i < 12; ++i) {
        mean[i] += values[i];
        put(values[i], i == 11);
      }
      ++rows;
    }
    if (rows > 0)
      for (int i = 0; i < 12; ++i) put(mean[i] / double(rows), i == 11);
    write_file(er_out, csv.str());
    std::cout << "scored " << rows << " pairs -> " << er_out << "\n";
  });

  // pipeline run
  auto* pipeline_cmd = app.add_subcommand("pipeline", "full pipeline")->require_subcommand(1);
  auto* pipeline_run_cmd = pipeline_cmd->add_subcommand("run", "run configured stages in order");
  std::string pr_config;
  pipeline_run_cmd->add_option("--config", pr_config, "pipeline config JSON")->required();
  pipeline_run_cmd->callback([&] {
    auto config = pipeline::PipelineConfig::from_file(pr_config);
    if (app.count("--seed") > 0) config.seed = seed;
    if (stub) config.stub_clients = true;
    const auto manifest = pipeline::run_pipeline(config);
    const auto report = pipeline::emit_report(manifest);
    write_file((std::filesystem::path(config.out_dir) / "report.txt").string(), report.text);
    std::cout << report.text;
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const lexkit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
