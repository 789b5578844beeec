#include "glad/detector.hpp"

#include "glad/serialize.hpp"

#include <algorithm>
#include <cmath>

namespace glad {

namespace {

constexpr double kProbLo = 1e-7;
constexpr double kProbHi = 1.0 - 1e-7;

const char* kVariantNames[8] = {"GLAD",    "GLAD-N",  "GLAD-E",  "GLAD-RN",
                                "GLAD-RE", "GLAD-EL", "GLAD-NL", "GLAD-EE"};

// Assemble pair rows for a subset of edges under the variant's layout.
MatrixXd assemble_pairs(Variant variant, const MatrixXd& hn, const MatrixXd& he_rows,
                        const std::vector<std::pair<int, int>>& endpoints) {
  const bool node_on = uses_node_branch(variant);
  const bool edge_on = uses_edge_branch(variant);
  const int d1 = node_on ? static_cast<int>(hn.cols()) : 0;
  const int d2 = edge_on ? static_cast<int>(he_rows.cols()) : 0;
  MatrixXd pairs(static_cast<Eigen::Index>(endpoints.size()), 2 * d1 + d2);
  for (size_t r = 0; r < endpoints.size(); ++r) {
    auto [i, j] = endpoints[r];
    if (node_on) {
      pairs.row(static_cast<Eigen::Index>(r)).segment(0, d1) = hn.row(i);
      pairs.row(static_cast<Eigen::Index>(r)).segment(d1, d1) = hn.row(j);
    }
    if (edge_on)
      pairs.row(static_cast<Eigen::Index>(r)).segment(2 * d1, d2) =
          he_rows.row(static_cast<Eigen::Index>(r));
  }
  return pairs;
}

double sum_squares(const MatrixXd& m) { return m.squaredNorm(); }

struct ParamGroup {
  std::vector<AdamState> enc_w;
  AdamState disc;
  std::vector<AdamState> edge_w, edge_b;
  std::vector<AdamState> node_w, node_b;
  AdamState head_w, head_b;
};

}  // namespace

const char* variant_name(Variant v) { return kVariantNames[static_cast<size_t>(v)]; }

Variant variant_from_name(const std::string& name) {
  for (size_t i = 0; i < 8; ++i)
    if (name == kVariantNames[i]) return static_cast<Variant>(i);
  throw Error("unknown variant: " + name);
}

MatrixXd pair_representation(const MatrixXd& hn, const MatrixXd& he,
                             const std::vector<std::pair<int, int>>& endpoints) {
  if (static_cast<size_t>(he.rows()) != endpoints.size())
    throw Error("pair_representation: edge row count mismatch");
  const int d1 = static_cast<int>(hn.cols());
  const int d2 = static_cast<int>(he.cols());
  MatrixXd out(static_cast<Eigen::Index>(endpoints.size()), 2 * d1 + d2);
  for (size_t r = 0; r < endpoints.size(); ++r) {
    auto [i, j] = endpoints[r];
    if (i < 0 || i >= hn.rows() || j < 0 || j >= hn.rows())
      throw Error("pair_representation: node row out of range");
    out.row(static_cast<Eigen::Index>(r)).segment(0, d1) = hn.row(i);
    out.row(static_cast<Eigen::Index>(r)).segment(d1, d1) = hn.row(j);
    out.row(static_cast<Eigen::Index>(r)).segment(2 * d1, d2) =
        he.row(static_cast<Eigen::Index>(r));
  }
  return out;
}

LrLossResult lr_loss(const MatrixXd& pairs, const std::vector<int>& labels, const LrHead& head,
                     LrLossMode mode) {
  const Eigen::Index n = pairs.rows();
  if (static_cast<size_t>(n) != labels.size()) throw Error("lr_loss: label count mismatch");
  if (pairs.cols() != head.w.size()) throw Error("lr_loss: head dimension mismatch");

  LrLossResult res;
  res.d_w = VectorXd::Zero(head.w.size());
  res.d_pairs = MatrixXd::Zero(n, pairs.cols());

  VectorXd logits = pairs * head.w;
  logits.array() += head.b;
  const double inv_n = 1.0 / static_cast<double>(n);

  double loss = 0.0;
  VectorXd dz(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = sigmoid(logits(i));
    double y = static_cast<double>(labels[static_cast<size_t>(i)]);
    if (mode == LrLossMode::Mae) {
      loss += std::abs(y - s);
      double dd = 0.0;  // subgradient 0 at exact ties
      if (s > y) dd = 1.0;
      else if (s < y) dd = -1.0;
      dz(i) = inv_n * dd * s * (1.0 - s);
    } else {
      double sc = std::min(std::max(s, kProbLo), kProbHi);
      loss += -(y * std::log(sc) + (1.0 - y) * std::log(1.0 - sc));
      double ds = 0.0;
      if (s > kProbLo && s < kProbHi) ds = -y / s + (1.0 - y) / (1.0 - s);
      dz(i) = inv_n * ds * s * (1.0 - s);
    }
  }
  res.loss = loss * inv_n;
  res.d_w = pairs.transpose() * dz;
  res.d_b = dz.sum();
  res.d_pairs = dz * head.w.transpose();
  return res;
}

double regularization_term(const std::vector<MatrixXd>& ae_weights,
                           const std::vector<VectorXd>& ae_biases,
                           const std::vector<MatrixXd>& gcn_weights) {
  double acc = 0.0;
  for (const MatrixXd& w : ae_weights) acc += sum_squares(w);
  for (const VectorXd& b : ae_biases) acc += b.squaredNorm();
  for (const MatrixXd& w : gcn_weights) acc += sum_squares(w);
  return acc;
}

int JointModel::pair_dim() const {
  int d = 0;
  if (uses_node_branch(config.variant)) d += 2 * static_cast<int>(hn.cols());
  if (uses_edge_branch(config.variant)) d += static_cast<int>(he.cols());
  return d;
}

JointModel train_glad(const CitationNetwork& net, const MatrixXd& x, const MatrixXd& z,
                      const std::vector<LabeledEdge>& y_l, const TrainConfig& cfg) {
  if (y_l.empty()) throw Error("train_glad: no labeled edges");
  bool has_pos = false, has_neg = false;
  for (const LabeledEdge& le : y_l) (le.label == 1 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) throw Error("train_glad: training labels cover a single class");

  const bool node_on = uses_node_branch(cfg.variant);
  const bool edge_on = uses_edge_branch(cfg.variant);
  const bool dgi_on = uses_dgi(cfg.variant);
  const bool ln_term = node_on && cfg.variant != Variant::GLAD_EL;
  const bool le_term = edge_on && cfg.variant != Variant::GLAD_NL;

  JointModel model;
  model.config = cfg;

  // input substitution for the random-vector variants
  MatrixXd x_used = x, z_used = z;
  if (cfg.variant == Variant::GLAD_RN) {
    Rng rng(derive_seed(cfg.seed, 11));
    for (Eigen::Index r = 0; r < x_used.rows(); ++r)
      for (Eigen::Index c = 0; c < x_used.cols(); ++c) x_used(r, c) = rng.normal();
  }
  if (cfg.variant == Variant::GLAD_RE) {
    Rng rng(derive_seed(cfg.seed, 12));
    for (Eigen::Index r = 0; r < z_used.rows(); ++r)
      for (Eigen::Index c = 0; c < z_used.cols(); ++c) z_used(r, c) = rng.uniform01();
  }

  SparseMat prop;
  if (node_on && dgi_on) prop = normalized_propagation(net.adjacency());

  // independent pretraining
  if (dgi_on) {
    DgiConfig dc;
    dc.d1 = cfg.d1;
    dc.layers = cfg.gcn_layers;
    dc.lr = cfg.pretrain_lr;
    dc.epochs = cfg.dgi_pretrain_epochs;
    dc.sigma_noise = cfg.sigma_noise;
    dc.act = cfg.activation;
    dc.seed = derive_seed(cfg.seed, 21);
    DgiResult res = train_dgi(net.adjacency(), x_used, dc);
    model.encoder = std::move(res.encoder);
    model.disc = std::move(res.disc);
    model.node_pretrain_trace = std::move(res.loss_trace);
  } else if (node_on) {
    // GLAD_EE: autoencoder over the node features, code width d1
    AeTrainResult res = train_autoencoder(x_used, {cfg.d1}, cfg.pretrain_lr,
                                          cfg.ae_pretrain_epochs, derive_seed(cfg.seed, 22));
    model.node_ae = std::move(res.ae);
    model.node_pretrain_trace = std::move(res.loss_trace);
  }
  if (edge_on) {
    AeTrainResult res = train_autoencoder(z_used, cfg.ae_hidden, cfg.pretrain_lr,
                                          cfg.ae_pretrain_epochs, derive_seed(cfg.seed, 23));
    model.edge_ae = std::move(res.ae);
    model.edge_pretrain_trace = std::move(res.loss_trace);
  }

  const int d1_eff = node_on ? (dgi_on ? cfg.d1 : model.node_ae.code_dim()) : 0;
  const int d2_eff = edge_on ? model.edge_ae.code_dim() : 0;
  const int pair_dim = (node_on ? 2 * d1_eff : 0) + d2_eff;

  {
    Rng rng(derive_seed(cfg.seed, 24));
    double scale = 1.0 / std::sqrt(static_cast<double>(pair_dim));
    model.head.w.resize(pair_dim);
    for (int i = 0; i < pair_dim; ++i) model.head.w(i) = rng.uniform(-scale, scale);
    model.head.b = 0.0;
  }

  ParamGroup opt;
  opt.enc_w.resize(model.encoder.weights.size());
  opt.edge_w.resize(model.edge_ae.weights.size());
  opt.edge_b.resize(model.edge_ae.weights.size());
  opt.node_w.resize(model.node_ae.weights.size());
  opt.node_b.resize(model.node_ae.weights.size());

  Rng batch_rng(derive_seed(cfg.seed, 25));
  std::vector<size_t> scratch(y_l.size());
  for (size_t i = 0; i < scratch.size(); ++i) scratch[i] = i;
  const int batch = std::min<int>(cfg.batch_size, static_cast<int>(y_l.size()));

  double prev_loss = 0.0;
  int stable = 0;
  const int n1 = net.n1();

  for (int step = 0; step < cfg.max_epochs; ++step) {
    double l_n = 0.0, l_e = 0.0;

    // node branch forward (full graph)
    MatrixXd hn;
    GcnForward pos_cache, neg_cache;
    AeForward node_fwd;
    DgiLossParts dgi_parts;
    MatrixXd d_hn;
    MatrixXd d_node_recon;
    if (node_on) {
      if (dgi_on) {
        hn = gcn_forward(prop, x_used, model.encoder, &pos_cache);
      } else {
        node_fwd = ae_forward(x_used, model.node_ae);
        hn = node_fwd.acts[static_cast<size_t>(model.node_ae.code_layer)];
      }
      d_hn = MatrixXd::Zero(hn.rows(), hn.cols());
      if (ln_term) {
        if (dgi_on) {
          Rng noise(derive_seed(cfg.seed, 0x5A00 + static_cast<uint64_t>(step)));
          MatrixXd xt = corrupt_features(x_used, cfg.sigma_noise, noise);
          MatrixXd hneg = gcn_forward(prop, xt, model.encoder, &neg_cache);
          VectorXd s = readout(hn);
          dgi_parts = dgi_loss(hn, hneg, s, model.disc);
          l_n = dgi_parts.loss;
          d_hn += dgi_parts.d_pos;
          d_hn.rowwise() += dgi_parts.d_s.transpose() / static_cast<double>(n1);
        } else {
          MatrixXd diff = node_fwd.acts.back() - x_used;
          l_n = diff.squaredNorm() / static_cast<double>(n1);
          d_node_recon = (2.0 / static_cast<double>(n1)) * diff;
        }
      }
    }

    // batch of labeled edges
    for (int i = 0; i < batch; ++i) {
      size_t j = static_cast<size_t>(
          batch_rng.uniform_int(static_cast<int64_t>(i), static_cast<int64_t>(scratch.size()) - 1));
      std::swap(scratch[static_cast<size_t>(i)], scratch[j]);
    }
    std::vector<std::pair<int, int>> batch_endpoints(static_cast<size_t>(batch));
    std::vector<int> batch_labels(static_cast<size_t>(batch));
    MatrixXd z_batch(batch, z_used.cols());
    for (int i = 0; i < batch; ++i) {
      const LabeledEdge& le = y_l[scratch[static_cast<size_t>(i)]];
      batch_endpoints[static_cast<size_t>(i)] = net.edge_endpoints(le.edge);
      batch_labels[static_cast<size_t>(i)] = le.label;
      z_batch.row(i) = z_used.row(le.edge);
    }

    // edge branch forward on the batch
    AeForward edge_fwd;
    MatrixXd he_batch;
    MatrixXd d_edge_recon;
    if (edge_on) {
      edge_fwd = ae_forward(z_batch, model.edge_ae);
      he_batch = edge_fwd.acts[static_cast<size_t>(model.edge_ae.code_layer)];
      if (le_term) {
        MatrixXd diff = edge_fwd.acts.back() - z_batch;
        l_e = diff.squaredNorm() / static_cast<double>(batch);
        d_edge_recon = (2.0 / static_cast<double>(batch)) * diff;
      }
    }

    // classification on the batch
    MatrixXd pairs = assemble_pairs(cfg.variant, hn, he_batch, batch_endpoints);
    LrLossResult lr = lr_loss(pairs, batch_labels, model.head, cfg.lr_loss_mode);

    // split the beta-weighted pair gradient back to the branches
    MatrixXd d_he_batch;
    if (edge_on) d_he_batch = MatrixXd::Zero(batch, d2_eff);
    for (int r = 0; r < batch; ++r) {
      auto [i, j] = batch_endpoints[static_cast<size_t>(r)];
      if (node_on) {
        d_hn.row(i) += cfg.beta * lr.d_pairs.row(r).segment(0, d1_eff);
        d_hn.row(j) += cfg.beta * lr.d_pairs.row(r).segment(d1_eff, d1_eff);
      }
      if (edge_on)
        d_he_batch.row(r) =
            cfg.beta * lr.d_pairs.row(r).segment(node_on ? 2 * d1_eff : 0, d2_eff);
    }

    // backward passes and regularizer
    std::vector<MatrixXd> d_enc_w(model.encoder.weights.size());
    for (size_t l = 0; l < d_enc_w.size(); ++l)
      d_enc_w[l] = MatrixXd::Zero(model.encoder.weights[l].rows(),
                                  model.encoder.weights[l].cols());
    AeGradients d_edge, d_node;
    if (node_on && dgi_on) {
      gcn_backward(prop, model.encoder, pos_cache, d_hn, d_enc_w);
      if (ln_term) gcn_backward(prop, model.encoder, neg_cache, dgi_parts.d_neg, d_enc_w);
    }
    if (node_on && !dgi_on) d_node = ae_backward(node_fwd, model.node_ae, d_node_recon, d_hn);
    if (edge_on) d_edge = ae_backward(edge_fwd, model.edge_ae, d_edge_recon, d_he_batch);

    double reg = 0.0;
    if (edge_on)
      reg += regularization_term(model.edge_ae.weights, model.edge_ae.biases, {});
    if (node_on && !dgi_on)
      reg += regularization_term(model.node_ae.weights, model.node_ae.biases, {});
    if (node_on && dgi_on) reg += regularization_term({}, {}, model.encoder.weights);

    double l_sum = joint_loss(ln_term ? l_n : 0.0, le_term ? l_e : 0.0, lr.loss, reg,
                              cfg.alpha, cfg.beta);
    if (!std::isfinite(l_sum))
      throw Error("train_glad: divergence at step " + std::to_string(step));
    model.joint_trace.push_back(l_sum);

    // parameter updates, fixed order
    if (node_on && dgi_on) {
      for (size_t l = 0; l < model.encoder.weights.size(); ++l) {
        MatrixXd g = d_enc_w[l] + 2.0 * cfg.alpha * model.encoder.weights[l];
        adam_step(model.encoder.weights[l], g, opt.enc_w[l], cfg.lr);
      }
      if (ln_term) adam_step(model.disc.w, dgi_parts.d_disc, opt.disc, cfg.lr);
    }
    if (node_on && !dgi_on) {
      for (size_t l = 0; l < model.node_ae.weights.size(); ++l) {
        MatrixXd gw = d_node.d_weights[l] + 2.0 * cfg.alpha * model.node_ae.weights[l];
        VectorXd gb = d_node.d_biases[l] + 2.0 * cfg.alpha * model.node_ae.biases[l];
        adam_step(model.node_ae.weights[l], gw, opt.node_w[l], cfg.lr);
        adam_step(model.node_ae.biases[l], gb, opt.node_b[l], cfg.lr);
      }
    }
    if (edge_on) {
      for (size_t l = 0; l < model.edge_ae.weights.size(); ++l) {
        MatrixXd gw = d_edge.d_weights[l] + 2.0 * cfg.alpha * model.edge_ae.weights[l];
        VectorXd gb = d_edge.d_biases[l] + 2.0 * cfg.alpha * model.edge_ae.biases[l];
        adam_step(model.edge_ae.weights[l], gw, opt.edge_w[l], cfg.lr);
        adam_step(model.edge_ae.biases[l], gb, opt.edge_b[l], cfg.lr);
      }
    }
    adam_step(model.head.w, VectorXd(cfg.beta * lr.d_w), opt.head_w, cfg.lr);
    {
      VectorXd b(1), gb(1);
      b(0) = model.head.b;
      gb(0) = cfg.beta * lr.d_b;
      adam_step(b, gb, opt.head_b, cfg.lr);
      model.head.b = b(0);
    }

    model.joint_steps = step + 1;
    double rel = std::abs(l_sum - prev_loss) / std::max(1e-12, std::abs(prev_loss));
    if (step > 0 && rel < cfg.epsilon) {
      if (++stable >= 5) break;
    } else {
      stable = 0;
    }
    prev_loss = l_sum;
  }

  // final representations over the uncorrupted inputs
  if (node_on)
    model.hn = dgi_on ? model.encoder.encode(prop, x_used) : model.node_ae.encode_rows(x_used);
  if (edge_on) model.he = model.edge_ae.encode_rows(z_used);
  return model;
}

std::vector<Prediction> predict_edges(const JointModel& model, const CitationNetwork& net,
                                      const std::vector<int>& edge_indices) {
  const bool node_on = uses_node_branch(model.config.variant);
  const bool edge_on = uses_edge_branch(model.config.variant);
  std::vector<Prediction> out;
  out.reserve(edge_indices.size());
  for (int e : edge_indices) {
    if (e < 0 || e >= net.n2()) throw Error("predict: edge index out of range");
    auto [i, j] = net.edge_endpoints(e);
    VectorXd pair(model.head.w.size());
    int off = 0;
    if (node_on) {
      int d1 = static_cast<int>(model.hn.cols());
      pair.segment(0, d1) = model.hn.row(i).transpose();
      pair.segment(d1, d1) = model.hn.row(j).transpose();
      off = 2 * d1;
    }
    if (edge_on)
      pair.segment(off, model.he.cols()) = model.he.row(e).transpose();
    double score = sigmoid(pair.dot(model.head.w) + model.head.b);
    const CitationEdge& ce = net.edges()[static_cast<size_t>(e)];
    out.push_back({ce.src, ce.dst, score, score > 0.5 ? 1 : 0});
  }
  return out;
}

std::vector<Prediction> predict(const JointModel& model, const CitationNetwork& net,
                                const std::vector<std::pair<std::string, std::string>>& edges) {
  std::vector<int> indices;
  indices.reserve(edges.size());
  for (const auto& [src, dst] : edges) {
    int e = net.edge_index(src, dst);
    if (e < 0) throw Error("predict: unknown edge " + src + " -> " + dst);
    indices.push_back(e);
  }
  return predict_edges(model, net, indices);
}

namespace {

void write_config(BinWriter& w, const TrainConfig& cfg) {
  w.f64(cfg.alpha);
  w.f64(cfg.beta);
  w.f64(cfg.pretrain_lr);
  w.f64(cfg.lr);
  w.u32(static_cast<uint32_t>(cfg.batch_size));
  w.f64(cfg.epsilon);
  w.u32(static_cast<uint32_t>(cfg.max_epochs));
  w.u64(cfg.seed);
  w.u32(static_cast<uint32_t>(cfg.variant));
  w.u32(static_cast<uint32_t>(cfg.lr_loss_mode));
  w.u32(static_cast<uint32_t>(cfg.d1));
  w.u32(static_cast<uint32_t>(cfg.gcn_layers));
  w.u32(static_cast<uint32_t>(cfg.activation));
  w.f64(cfg.sigma_noise);
  w.u32(static_cast<uint32_t>(cfg.dgi_pretrain_epochs));
  w.u64(cfg.ae_hidden.size());
  for (int h : cfg.ae_hidden) w.u32(static_cast<uint32_t>(h));
  w.u32(static_cast<uint32_t>(cfg.ae_pretrain_epochs));
}

TrainConfig read_config(BinReader& r) {
  TrainConfig cfg;
  cfg.alpha = r.f64();
  cfg.beta = r.f64();
  cfg.pretrain_lr = r.f64();
  cfg.lr = r.f64();
  cfg.batch_size = static_cast<int>(r.u32());
  cfg.epsilon = r.f64();
  cfg.max_epochs = static_cast<int>(r.u32());
  cfg.seed = r.u64();
  cfg.variant = static_cast<Variant>(r.u32());
  cfg.lr_loss_mode = static_cast<LrLossMode>(r.u32());
  cfg.d1 = static_cast<int>(r.u32());
  cfg.gcn_layers = static_cast<int>(r.u32());
  cfg.activation = static_cast<Activation>(r.u32());
  cfg.sigma_noise = r.f64();
  cfg.dgi_pretrain_epochs = static_cast<int>(r.u32());
  cfg.ae_hidden.clear();
  uint64_t n = r.u64();
  for (uint64_t i = 0; i < n; ++i) cfg.ae_hidden.push_back(static_cast<int>(r.u32()));
  cfg.ae_pretrain_epochs = static_cast<int>(r.u32());
  return cfg;
}

void write_ae(BinWriter& w, const Autoencoder& ae) {
  w.u32(static_cast<uint32_t>(ae.code_layer));
  w.u64(ae.weights.size());
  for (size_t l = 0; l < ae.weights.size(); ++l) {
    w.matrix(ae.weights[l]);
    w.vector(ae.biases[l]);
  }
}

Autoencoder read_ae(BinReader& r) {
  Autoencoder ae;
  ae.code_layer = static_cast<int>(r.u32());
  uint64_t n = r.u64();
  for (uint64_t l = 0; l < n; ++l) {
    ae.weights.push_back(r.matrix());
    ae.biases.push_back(r.vector());
  }
  return ae;
}

}  // namespace

void write_joint_model(BinWriter& w, const JointModel& model) {
  write_config(w, model.config);
  w.u32(static_cast<uint32_t>(model.encoder.act));
  w.u64(model.encoder.weights.size());
  for (const MatrixXd& m : model.encoder.weights) w.matrix(m);
  w.matrix(model.disc.w);
  write_ae(w, model.edge_ae);
  write_ae(w, model.node_ae);
  w.vector(model.head.w);
  w.f64(model.head.b);
  w.matrix(model.hn);
  w.matrix(model.he);
  w.u32(static_cast<uint32_t>(model.joint_steps));
}

JointModel read_joint_model(BinReader& r) {
  JointModel model;
  model.config = read_config(r);
  model.encoder.act = static_cast<Activation>(r.u32());
  uint64_t n = r.u64();
  for (uint64_t i = 0; i < n; ++i) model.encoder.weights.push_back(r.matrix());
  model.disc.w = r.matrix();
  model.edge_ae = read_ae(r);
  model.node_ae = read_ae(r);
  model.head.w = r.vector();
  model.head.b = r.f64();
  model.hn = r.matrix();
  model.he = r.matrix();
  model.joint_steps = static_cast<int>(r.u32());
  return model;
}

void save_joint_model(const JointModel& model, const std::string& path) {
  BinWriter w(path);
  w.header(ModelKind::Joint);
  write_joint_model(w, model);
}

JointModel load_joint_model(const std::string& path) {
  BinReader r(path);
  r.header(ModelKind::Joint);
  return read_joint_model(r);
}

}  // namespace glad
