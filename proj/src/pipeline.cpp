#include "glad/pipeline.hpp"

#include "glad/serialize.hpp"

#include <json.hpp>

#include <fstream>
#include <thread>

namespace glad {

using nlohmann::json;

PipelineConfig default_pipeline_config() { return PipelineConfig{}; }

namespace {

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "identity") return Activation::Identity;
  if (name == "tanh") return Activation::Tanh;
  throw Error("unknown activation: " + name);
}

void apply_train_json(const json& j, TrainConfig& t) {
  if (j.contains("alpha")) t.alpha = j["alpha"].get<double>();
  if (j.contains("beta")) t.beta = j["beta"].get<double>();
  if (j.contains("pretrain_lr")) t.pretrain_lr = j["pretrain_lr"].get<double>();
  if (j.contains("lr")) t.lr = j["lr"].get<double>();
  if (j.contains("batch_size")) t.batch_size = j["batch_size"].get<int>();
  if (j.contains("epsilon")) t.epsilon = j["epsilon"].get<double>();
  if (j.contains("max_epochs")) t.max_epochs = j["max_epochs"].get<int>();
  if (j.contains("seed")) t.seed = j["seed"].get<uint64_t>();
  if (j.contains("variant")) t.variant = variant_from_name(j["variant"].get<std::string>());
  if (j.contains("lr_loss")) {
    std::string mode = j["lr_loss"].get<std::string>();
    if (mode == "mae") t.lr_loss_mode = LrLossMode::Mae;
    else if (mode == "bce") t.lr_loss_mode = LrLossMode::Bce;
    else throw Error("unknown lr_loss mode: " + mode);
  }
  if (j.contains("d1")) t.d1 = j["d1"].get<int>();
  if (j.contains("gcn_layers")) t.gcn_layers = j["gcn_layers"].get<int>();
  if (j.contains("activation"))
    t.activation = activation_from_name(j["activation"].get<std::string>());
  if (j.contains("sigma_noise")) t.sigma_noise = j["sigma_noise"].get<double>();
  if (j.contains("dgi_pretrain_epochs"))
    t.dgi_pretrain_epochs = j["dgi_pretrain_epochs"].get<int>();
  if (j.contains("ae_hidden")) t.ae_hidden = j["ae_hidden"].get<std::vector<int>>();
  if (j.contains("ae_pretrain_epochs"))
    t.ae_pretrain_epochs = j["ae_pretrain_epochs"].get<int>();
}

}  // namespace

PipelineConfig pipeline_config_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path + ": parse error: " + e.what());
  }
  PipelineConfig cfg;
  if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
  if (j.contains("jobs")) cfg.jobs = j["jobs"].get<int>();
  if (j.contains("pvdm")) {
    const json& p = j["pvdm"];
    if (p.contains("p")) cfg.pvdm.p = p["p"].get<int>();
    if (p.contains("win")) cfg.pvdm.win = p["win"].get<int>();
    if (p.contains("epochs")) cfg.pvdm.epochs = p["epochs"].get<int>();
    if (p.contains("lr")) cfg.pvdm.lr = p["lr"].get<double>();
    if (p.contains("min_count")) cfg.pvdm_min_count = p["min_count"].get<int>();
  }
  if (j.contains("svm")) {
    const json& s = j["svm"];
    if (s.contains("R")) cfg.svm.R = s["R"].get<double>();
    if (s.contains("kernel")) {
      std::string k = s["kernel"].get<std::string>();
      if (k == "linear") cfg.svm.kernel = Kernel::Linear;
      else if (k == "rbf") cfg.svm.kernel = Kernel::Rbf;
      else throw Error("unknown kernel: " + k);
    }
    if (s.contains("gamma")) cfg.svm.gamma = s["gamma"].get<double>();
    if (s.contains("tol")) cfg.svm.tol = s["tol"].get<double>();
    if (s.contains("max_iter")) cfg.svm.max_iter = s["max_iter"].get<long>();
    if (s.contains("binary_cp")) cfg.svm_binary_cp = s["binary_cp"].get<bool>();
    if (s.contains("class_r_scale")) {
      auto scale = s["class_r_scale"].get<std::vector<double>>();
      if (scale.size() != kNumCategories) throw Error("class_r_scale needs 6 entries");
      std::copy(scale.begin(), scale.end(), cfg.svm.class_r_scale.begin());
    }
  }
  if (j.contains("train")) apply_train_json(j["train"], cfg.train);
  if (j.contains("splits")) {
    const json& s = j["splits"];
    if (s.contains("train_fraction")) cfg.splits.train_fraction = s["train_fraction"].get<double>();
    if (s.contains("n_splits")) cfg.splits.n_splits = s["n_splits"].get<int>();
    if (s.contains("seed")) cfg.splits.seed = s["seed"].get<uint64_t>();
  }
  // per-phase seeds default to derivations of the master seed
  if (!j.contains("train") || !j["train"].contains("seed"))
    cfg.train.seed = derive_seed(cfg.seed, 41);
  if (!j.contains("splits") || !j["splits"].contains("seed"))
    cfg.splits.seed = derive_seed(cfg.seed, 42);
  return cfg;
}

PurposeCategory PurposeBundle::classify_context(const std::string& context) const {
  return classify(svm, context_embedding(embedder, context));
}

PurposeFn PurposeBundle::as_fn() const {
  if (binary_mode) {
    return [this](const std::string& context) {
      VectorXd c = context_embedding(embedder, context);
      return binary_cp_flag(binary, c) == 1 ? PurposeCategory::Use : PurposeCategory::Other;
    };
  }
  return [this](const std::string& context) { return classify_context(context); };
}

void save_purpose_bundle(const PurposeBundle& bundle, const std::string& path) {
  BinWriter w(path);
  w.header(ModelKind::Purpose);
  w.u32(2);  // bundle layout tag: embedder + ovr (+ binary)
  write_pvdm(w, bundle.embedder);
  write_ovr_svm(w, bundle.svm);
  w.u32(bundle.binary_mode ? 1 : 0);
  if (bundle.binary_mode) {
    w.matrix(bundle.binary.inputs);
    w.u64(bundle.binary.y.size());
    for (int v : bundle.binary.y) w.i64(v);
    w.u32(static_cast<uint32_t>(bundle.binary.opts.kernel));
    w.f64(bundle.binary.opts.gamma);
    w.vector(bundle.binary.svm.alphas);
    w.f64(bundle.binary.svm.bias);
    w.u64(bundle.binary.svm.support.size());
    for (int i : bundle.binary.svm.support) w.i64(i);
  }
}

PurposeBundle load_purpose_bundle(const std::string& path) {
  BinReader r(path);
  r.header(ModelKind::Purpose);
  uint32_t tag = r.u32();
  if (tag != 2) throw Error("not a purpose bundle: " + path);
  PurposeBundle bundle;
  bundle.embedder = read_pvdm(r);
  bundle.svm = read_ovr_svm(r);
  bundle.binary_mode = r.u32() != 0;
  if (bundle.binary_mode) {
    bundle.binary.inputs = r.matrix();
    uint64_t n = r.u64();
    for (uint64_t i = 0; i < n; ++i) bundle.binary.y.push_back(static_cast<int>(r.i64()));
    bundle.binary.opts.kernel = static_cast<Kernel>(r.u32());
    bundle.binary.opts.gamma = r.f64();
    bundle.binary.svm.alphas = r.vector();
    bundle.binary.svm.bias = r.f64();
    bundle.binary.svm.trained = true;
    uint64_t ns = r.u64();
    for (uint64_t i = 0; i < ns; ++i)
      bundle.binary.svm.support.push_back(static_cast<int>(r.i64()));
  }
  return bundle;
}

PvdmModel train_text_model(const CitationNetwork& net, const PipelineConfig& cfg) {
  TokenCorpus corpus;
  corpus.reserve(static_cast<size_t>(net.n1()));
  for (const Paper& p : net.papers()) corpus.push_back(tokenize(p.abstract_text));
  Vocabulary vocab = build_vocab(corpus, cfg.pvdm_min_count);
  PvdmConfig pc = cfg.pvdm;
  pc.seed = derive_seed(cfg.seed, 31);
  return train_pvdm(corpus, vocab, pc);
}

PurposeBundle make_purpose_bundle(PvdmModel embedder, const std::vector<Annotation>& annotations,
                                  const PipelineConfig& cfg) {
  PurposeBundle bundle;
  bundle.embedder = std::move(embedder);
  std::vector<ContextSample> samples;
  samples.reserve(annotations.size());
  for (const Annotation& a : annotations)
    samples.push_back({context_embedding(bundle.embedder, a.context), a.category});
  bundle.svm = train_ovr_svm(samples, cfg.svm);
  if (cfg.svm_binary_cp) {
    bundle.binary_mode = true;
    bundle.binary = train_binary_cp(samples, cfg.svm);
  }
  return bundle;
}

PurposeBundle train_purpose_bundle(const CitationNetwork& net,
                                   const std::vector<Annotation>& annotations,
                                   const PipelineConfig& cfg) {
  return make_purpose_bundle(train_text_model(net, cfg), annotations, cfg);
}

DatasetDir load_dataset_dir(const std::string& dir) {
  DatasetDir out{CitationNetwork::from_files(dir + "/papers.jsonl", dir + "/citations.jsonl"),
                 load_annotations(dir + "/annotations.jsonl")};
  return out;
}

PreparedData prepare_data(const CitationNetwork& net, const PvdmModel& pvdm,
                          const PurposeBundle& purpose) {
  PreparedData data{net, {}, {}, {}};
  data.x = assemble_node_features(net, pvdm).x;
  data.z = compute_edge_features(net, purpose.as_fn()).z;
  for (int e = 0; e < net.n2(); ++e) {
    EdgeLabel label = net.edges()[static_cast<size_t>(e)].label;
    if (label != EdgeLabel::Unknown)
      data.labeled.push_back({e, label == EdgeLabel::Anomalous ? 1 : 0});
  }
  return data;
}

void save_model_bundle(const ModelBundle& bundle, const std::string& path) {
  BinWriter w(path);
  w.header(ModelKind::Bundle);
  w.u32(7);  // layout tag: pvdm + joint
  write_pvdm(w, bundle.pvdm);
  write_joint_model(w, bundle.joint);
}

ModelBundle load_model_bundle(const std::string& path) {
  BinReader r(path);
  r.header(ModelKind::Bundle);
  uint32_t tag = r.u32();
  if (tag != 7) throw Error("not a model bundle: " + path);
  ModelBundle bundle;
  bundle.pvdm = read_pvdm(r);
  bundle.joint = read_joint_model(r);
  return bundle;
}

int effective_jobs(const PipelineConfig& cfg) {
  if (cfg.jobs > 0) return cfg.jobs;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace glad
