#include "glad/pipeline.hpp"
#include "glad/serialize.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace glad;

namespace {

PipelineConfig load_pipeline_config(const std::string& config_path, uint64_t seed_override,
                                    bool seed_given) {
  PipelineConfig cfg = config_path.empty() ? default_pipeline_config()
                                           : pipeline_config_from_json_file(config_path);
  if (config_path.empty()) {
    cfg.train.seed = derive_seed(cfg.seed, 41);
    cfg.splits.seed = derive_seed(cfg.seed, 42);
  }
  if (seed_given) {
    cfg.seed = seed_override;
    cfg.train.seed = derive_seed(cfg.seed, 41);
    cfg.splits.seed = derive_seed(cfg.seed, 42);
  }
  return cfg;
}

struct Prepared {
  DatasetDir dataset;
  PvdmModel pvdm;
  PurposeBundle purpose;
  PreparedData data;
};

Prepared prepare_from_dir(const std::string& data_dir, const PipelineConfig& cfg,
                          const std::string& purpose_model_path) {
  Prepared out{load_dataset_dir(data_dir), {}, {}, {}};
  if (!purpose_model_path.empty()) {
    out.purpose = load_purpose_bundle(purpose_model_path);
    out.pvdm = train_text_model(out.dataset.net, cfg);
  } else {
    out.pvdm = train_text_model(out.dataset.net, cfg);
    out.purpose = make_purpose_bundle(out.pvdm, out.dataset.annotations, cfg);
  }
  out.data = prepare_data(out.dataset.net, out.pvdm, out.purpose);
  return out;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  out << content;
}

void emit_report(const std::string& out_prefix, const std::string& table,
                 const std::string& jsonl) {
  std::cout << table;
  if (!out_prefix.empty()) {
    write_text(out_prefix + ".txt", table);
    write_text(out_prefix + ".jsonl", jsonl);
    std::cout << "wrote " << out_prefix << ".txt and " << out_prefix << ".jsonl\n";
  }
}

std::vector<SweepValue> parse_sweep_values(SweepAxis axis, const std::string& raw) {
  std::vector<SweepValue> out;
  std::string group;
  std::vector<std::string> groups;
  char sep = axis == SweepAxis::AeArch ? ';' : ',';
  for (char ch : raw) {
    if (ch == sep) {
      groups.push_back(group);
      group.clear();
    } else {
      group.push_back(ch);
    }
  }
  groups.push_back(group);
  for (const std::string& g : groups) {
    if (g.empty()) continue;
    SweepValue v;
    switch (axis) {
      case SweepAxis::BatchSize:
      case SweepAxis::EmbeddingDim:
        v.int_value = std::stol(g);
        break;
      case SweepAxis::LearningRate:
        v.real_value = std::stod(g);
        break;
      case SweepAxis::AeArch: {
        std::string num;
        for (char ch : g + ",") {
          if (ch == ',') {
            if (!num.empty()) v.arch.push_back(std::stoi(num));
            num.clear();
          } else {
            num.push_back(ch);
          }
        }
        break;
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GLAD: anomalous citation detection over synthetic cartel benchmarks"};
  app.require_subcommand(1);

  std::string config_path, data_dir, out_path, variant_name_arg, purpose_model_path;
  uint64_t seed = 0;
  int jobs = -1;

  auto add_common = [&](CLI::App* cmd, bool with_data) {
    cmd->add_option("--config", config_path, "pipeline config JSON");
    if (with_data) cmd->add_option("--data-dir", data_dir, "dataset directory")->required();
    cmd->add_option("--seed", seed, "master seed override");
    return cmd;
  };

  // gen
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic labeled dataset");
  std::string gen_config_path;
  gen_cmd->add_option("--config", gen_config_path, "generator config JSON");
  gen_cmd->add_option("--out", out_path, "output directory")->required();
  gen_cmd->add_option("--seed", seed, "seed override");

  // purpose-train
  auto* pt_cmd = add_common(app.add_subcommand("purpose-train",
                                               "train the citation-purpose classifier"),
                            true);
  pt_cmd->add_option("--out", out_path, "output model file")->required();

  // purpose-classify
  auto* pc_cmd = app.add_subcommand("purpose-classify", "classify citation contexts");
  std::string pc_model, pc_in, pc_out;
  pc_cmd->add_option("--model", pc_model, "purpose model file")->required();
  pc_cmd->add_option("--in", pc_in, "input file, one context per line (default stdin)");
  pc_cmd->add_option("--out", pc_out, "output file (default stdout)");

  // train
  auto* train_cmd = add_common(app.add_subcommand("train", "train a GLAD model"), true);
  train_cmd->add_option("--out", out_path, "output model file")->required();
  train_cmd->add_option("--variant", variant_name_arg, "GLAD variant");
  train_cmd->add_option("--purpose-model", purpose_model_path, "reuse a purpose model file");

  // detect
  auto* detect_cmd = app.add_subcommand("detect", "score citations with a trained model");
  std::string detect_model;
  detect_cmd->add_option("--data-dir", data_dir, "dataset directory")->required();
  detect_cmd->add_option("--model", detect_model, "model bundle file")->required();
  detect_cmd->add_option("--out", out_path, "predictions file (default stdout)");

  // eval / ablate / sweep
  auto* eval_cmd = add_common(app.add_subcommand("eval", "split evaluation"), true);
  eval_cmd->add_option("--out", out_path, "report prefix");
  eval_cmd->add_option("--variant", variant_name_arg, "GLAD variant");
  eval_cmd->add_option("--jobs", jobs, "parallel splits");
  eval_cmd->add_option("--purpose-model", purpose_model_path, "reuse a purpose model file");

  auto* ablate_cmd = add_common(app.add_subcommand("ablate", "run all eight variants"), true);
  ablate_cmd->add_option("--out", out_path, "report prefix");
  ablate_cmd->add_option("--jobs", jobs, "parallel splits");
  ablate_cmd->add_option("--purpose-model", purpose_model_path, "reuse a purpose model file");

  auto* sweep_cmd = add_common(app.add_subcommand("sweep", "parameter sweep"), true);
  std::string axis_name, values_raw;
  sweep_cmd->add_option("--axis", axis_name,
                        "batch_size | embedding_dim | learning_rate | ae_arch")
      ->required();
  sweep_cmd->add_option("--values", values_raw,
                        "comma-separated values (';'-separated groups for ae_arch)")
      ->required();
  sweep_cmd->add_option("--out", out_path, "report prefix");
  sweep_cmd->add_option("--jobs", jobs, "parallel splits");
  sweep_cmd->add_option("--purpose-model", purpose_model_path, "reuse a purpose model file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_cmd->parsed()) {
      GeneratorConfig cfg = gen_config_path.empty()
                                ? default_generator_config()
                                : generator_config_from_json_file(gen_config_path);
      if (gen_cmd->count("--seed")) cfg.seed = seed;
      SyntheticDataset ds = generate(cfg);
      export_dataset(ds, out_path);
      write_generator_config(cfg, out_path + "/generator_config.json");
      std::cout << "generated " << ds.papers.size() << " papers, " << ds.edges.size()
                << " citations (" << ds.anomalous_edges.size() << " anomalous) in " << out_path
                << "\n";
      return 0;
    }

    bool seed_given = app.get_subcommands().front()->count("--seed") > 0;
    PipelineConfig cfg = load_pipeline_config(config_path, seed, seed_given);
    if (jobs > 0) cfg.jobs = jobs;
    if (!variant_name_arg.empty()) cfg.train.variant = variant_from_name(variant_name_arg);

    if (pt_cmd->parsed()) {
      DatasetDir dataset = load_dataset_dir(data_dir);
      PurposeBundle bundle = train_purpose_bundle(dataset.net, dataset.annotations, cfg);
      save_purpose_bundle(bundle, out_path);
      export_vocabulary(bundle.embedder.vocab, out_path + ".vocab.txt");

      long correct = 0;
      for (const Annotation& a : dataset.annotations)
        if (bundle.classify_context(a.context) == a.category) ++correct;
      std::cout << "purpose model saved to " << out_path << "; training accuracy "
                << fmt_g17(static_cast<double>(correct) /
                           static_cast<double>(dataset.annotations.size()))
                << " on " << dataset.annotations.size() << " annotations\n";
      return 0;
    }

    if (pc_cmd->parsed()) {
      PurposeBundle bundle = load_purpose_bundle(pc_model);
      std::istream* in = &std::cin;
      std::ifstream fin;
      if (!pc_in.empty()) {
        fin.open(pc_in);
        if (!fin) throw Error("cannot open " + pc_in);
        in = &fin;
      }
      std::ostream* out = &std::cout;
      std::ofstream fout;
      if (!pc_out.empty()) {
        fout.open(pc_out);
        if (!fout) throw Error("cannot open " + pc_out);
        out = &fout;
      }
      std::string line;
      while (std::getline(*in, line)) {
        if (line.empty()) continue;
        VectorXd c = context_embedding(bundle.embedder, line);
        auto values = decision_values(bundle.svm, c);
        *out << category_name(classify(bundle.svm, c));
        for (double v : values) *out << ", " << fmt_g17(v);
        *out << "\n";
      }
      return 0;
    }

    if (train_cmd->parsed()) {
      Prepared prep = prepare_from_dir(data_dir, cfg, purpose_model_path);
      if (prep.data.labeled.empty()) throw Error("train: dataset has no labeled edges");
      ModelBundle bundle{prep.pvdm,
                         train_glad(prep.data.net, prep.data.x, prep.data.z, prep.data.labeled,
                                    cfg.train)};
      save_model_bundle(bundle, out_path);

      std::vector<int> edge_idx, labels;
      for (const LabeledEdge& le : prep.data.labeled) {
        edge_idx.push_back(le.edge);
        labels.push_back(le.label);
      }
      std::vector<Prediction> preds = predict_edges(bundle.joint, prep.data.net, edge_idx);
      std::vector<int> hat(preds.size());
      std::vector<double> scores(preds.size());
      for (size_t i = 0; i < preds.size(); ++i) {
        hat[i] = preds[i].label_hat;
        scores[i] = preds[i].score;
      }
      Metrics m = compute_metrics(labels, hat, scores);
      std::cout << "model saved to " << out_path << " (" << variant_name(cfg.train.variant)
                << ", " << bundle.joint.joint_steps << " joint steps)\n";
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "training-set metrics: acc=%.4f prec=%.4f rec=%.4f f1=%.4f auc=%.4f\n",
                    m.accuracy, m.precision, m.recall, m.f1, m.auc);
      std::cout << buf;
      return 0;
    }

    if (detect_cmd->parsed()) {
      DatasetDir dataset = load_dataset_dir(data_dir);
      ModelBundle bundle = load_model_bundle(detect_model);
      std::vector<int> all(static_cast<size_t>(dataset.net.n2()));
      for (int e = 0; e < dataset.net.n2(); ++e) all[static_cast<size_t>(e)] = e;
      std::vector<Prediction> preds = predict_edges(bundle.joint, dataset.net, all);
      std::ostream* out = &std::cout;
      std::ofstream fout;
      if (!out_path.empty()) {
        fout.open(out_path);
        if (!fout) throw Error("cannot open " + out_path);
        out = &fout;
      }
      for (const Prediction& p : preds)
        *out << p.src << ", " << p.dst << ", " << fmt_g17(p.score) << ", " << p.label_hat
             << "\n";
      return 0;
    }

    if (eval_cmd->parsed()) {
      Prepared prep = prepare_from_dir(data_dir, cfg, purpose_model_path);
      SplitReport report = run_splits(prep.data, cfg.train, cfg.splits, effective_jobs(cfg));
      std::string name = variant_name(cfg.train.variant);
      emit_report(out_path, render_split_report(name, report),
                  split_report_jsonl(name, report));
      return 0;
    }

    if (ablate_cmd->parsed()) {
      Prepared prep = prepare_from_dir(data_dir, cfg, purpose_model_path);
      std::vector<VariantRow> rows = ablate(prep.data, cfg.train, cfg.splits,
                                            effective_jobs(cfg));
      std::string table, jsonl;
      for (const VariantRow& row : rows) {
        table += render_split_report(variant_name(row.variant), row.report);
        jsonl += split_report_jsonl(variant_name(row.variant), row.report);
      }
      emit_report(out_path, table, jsonl);
      return 0;
    }

    if (sweep_cmd->parsed()) {
      SweepAxis axis = sweep_axis_from_name(axis_name);
      std::vector<SweepValue> values = parse_sweep_values(axis, values_raw);
      Prepared prep = prepare_from_dir(data_dir, cfg, purpose_model_path);
      std::vector<SweepRow> rows = sweep(prep.data, cfg.train, cfg.splits, axis, values,
                                         effective_jobs(cfg));
      std::string table, jsonl;
      for (const SweepRow& row : rows) {
        std::string name = std::string(sweep_axis_name(axis)) + "=" + row.value.display(axis);
        table += render_split_report(name, row.report);
        jsonl += split_report_jsonl(name, row.report);
      }
      emit_report(out_path, table, jsonl);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
