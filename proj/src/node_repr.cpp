#include "glad/node_repr.hpp"

#include "glad/serialize.hpp"

#include <cmath>
#include <fstream>

namespace glad {

namespace {

constexpr double kProbLo = 1e-7;
constexpr double kProbHi = 1.0 - 1e-7;

MatrixXd apply_act(const MatrixXd& z, Activation act) {
  switch (act) {
    case Activation::Relu:
      return z.cwiseMax(0.0);
    case Activation::Identity:
      return z;
    case Activation::Tanh:
      return z.array().tanh();
  }
  throw Error("unknown activation");
}

MatrixXd act_grad(const MatrixXd& z, const MatrixXd& a, Activation act) {
  switch (act) {
    case Activation::Relu:
      return (z.array() > 0.0).cast<double>();
    case Activation::Identity:
      return MatrixXd::Ones(z.rows(), z.cols());
    case Activation::Tanh:
      return 1.0 - a.array().square();
  }
  throw Error("unknown activation");
}

}  // namespace

MatrixXd gcn_forward(const SparseMat& prop, const MatrixXd& x, const GcnEncoder& enc,
                     GcnForward* cache) {
  MatrixXd cur = x;
  for (const MatrixXd& w : enc.weights) {
    if (cur.cols() != w.rows())
      throw Error("gcn_encode: dimension mismatch (" + std::to_string(cur.cols()) + " vs " +
                  std::to_string(w.rows()) + ")");
    MatrixXd s = prop * cur;
    MatrixXd z = s * w;
    cur = apply_act(z, enc.act);
    if (cache) {
      cache->propagated.push_back(std::move(s));
      cache->preact.push_back(std::move(z));
      cache->activations.push_back(cur);
    }
  }
  return cur;
}

// Accumulates dL/dW_l for a branch given dL/dH_L; shared-weight branches call
// this once each and sum into the same gradient buffers.
void gcn_backward(const SparseMat& prop, const GcnEncoder& enc, const GcnForward& cache,
                  MatrixXd d_out, std::vector<MatrixXd>& d_weights) {
  for (int l = static_cast<int>(enc.weights.size()) - 1; l >= 0; --l) {
    MatrixXd dz =
        d_out.cwiseProduct(act_grad(cache.preact[static_cast<size_t>(l)],
                                    cache.activations[static_cast<size_t>(l)], enc.act));
    d_weights[static_cast<size_t>(l)].noalias() +=
        cache.propagated[static_cast<size_t>(l)].transpose() * dz;
    if (l > 0) {
      MatrixXd ds = dz * enc.weights[static_cast<size_t>(l)].transpose();
      d_out = prop.transpose() * ds;
    }
  }
}

NodeFeatureResult assemble_node_features(const CitationNetwork& net, const PvdmModel& pvdm) {
  if (pvdm.doc_count() != net.n1())
    throw Error("assemble_node_features: document count " + std::to_string(pvdm.doc_count()) +
                " does not match paper count " + std::to_string(net.n1()));

  const int n = net.n1();
  const int p = pvdm.p;
  NodeFeatureResult res;
  res.x.resize(n, p + 3);
  res.x.leftCols(p) = pvdm.doc_vecs;

  std::vector<CentralityFeatures> cents = centralities(net);
  for (int v = 0; v < n; ++v) {
    res.x(v, p) = cents[static_cast<size_t>(v)].a_cic;
    res.x(v, p + 1) = cents[static_cast<size_t>(v)].a_coc;
    res.x(v, p + 2) = cents[static_cast<size_t>(v)].p_odc;
    if (pvdm.doc_vecs.row(v).isZero(0.0)) res.zero_doc_rows.push_back(v);
  }

  // z-score the centrality columns; constant columns collapse to zero
  for (int c = p; c < p + 3; ++c) {
    double mean = res.x.col(c).mean();
    double var = (res.x.col(c).array() - mean).square().mean();
    double sd = std::sqrt(var);
    if (sd < 1e-12) {
      res.x.col(c).setZero();
    } else {
      res.x.col(c) = (res.x.col(c).array() - mean) / sd;
    }
  }
  return res;
}

MatrixXd corrupt_features(const MatrixXd& x, double sigma_noise, Rng& rng) {
  MatrixXd out = x;
  if (sigma_noise == 0.0) return out;
  VectorXd col_sd(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    double mean = x.col(c).mean();
    col_sd(c) = std::sqrt((x.col(c).array() - mean).square().mean());
  }
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      out(r, c) += rng.normal(0.0, sigma_noise * col_sd(c));
  return out;
}

SparseMat normalized_propagation(const SparseMat& adjacency) {
  const int n = static_cast<int>(adjacency.rows());
  SparseMat a_hat = adjacency;
  SparseMat eye(n, n);
  eye.setIdentity();
  a_hat = a_hat + eye;

  VectorXd degree = VectorXd::Zero(n);
  for (int k = 0; k < a_hat.outerSize(); ++k)
    for (SparseMat::InnerIterator it(a_hat, k); it; ++it) degree(it.row()) += it.value();

  VectorXd inv_sqrt = degree.array().inverse().sqrt();
  SparseMat out = a_hat;
  for (int k = 0; k < out.outerSize(); ++k)
    for (SparseMat::InnerIterator it(out, k); it; ++it)
      it.valueRef() = inv_sqrt(it.row()) * it.value() * inv_sqrt(it.col());
  return out;
}

MatrixXd GcnEncoder::encode(const SparseMat& prop, const MatrixXd& x) const {
  return gcn_forward(prop, x, *this, nullptr);
}

VectorXd readout(const MatrixXd& h_positive) {
  if (h_positive.rows() == 0) throw Error("readout: empty input");
  return h_positive.colwise().mean().transpose();
}

double discriminate(const VectorXd& h, const VectorXd& s, const Discriminator& disc) {
  if (h.size() != disc.w.rows() || s.size() != disc.w.cols())
    throw Error("discriminate: dimension mismatch");
  return sigmoid(h.dot(disc.w * s));
}

DgiLossParts dgi_loss(const MatrixXd& h_pos, const MatrixXd& h_neg, const VectorXd& s,
                      const Discriminator& disc) {
  const Eigen::Index np = h_pos.rows();
  const Eigen::Index nn = h_neg.rows();
  if (np == 0 || nn == 0) throw Error("dgi_loss: need positive and negative samples");
  const double inv_n = 1.0 / static_cast<double>(np + nn);

  DgiLossParts parts;
  parts.d_pos = MatrixXd::Zero(np, h_pos.cols());
  parts.d_neg = MatrixXd::Zero(nn, h_neg.cols());
  parts.d_s = VectorXd::Zero(s.size());
  parts.d_disc = MatrixXd::Zero(disc.w.rows(), disc.w.cols());

  VectorXd ws = disc.w * s;
  VectorXd pos_scores = h_pos * ws;  // logits
  VectorXd neg_scores = h_neg * ws;

  double loss = 0.0;
  for (Eigen::Index i = 0; i < np; ++i) {
    double d = sigmoid(pos_scores(i));
    double dc = std::min(std::max(d, kProbLo), kProbHi);
    loss -= std::log(dc);
    if (d > kProbLo && d < kProbHi) {
      double gu = -inv_n * (1.0 - d);  // d(loss)/d(logit)
      parts.d_disc.noalias() += gu * h_pos.row(i).transpose() * s.transpose();
      parts.d_pos.row(i) += gu * ws.transpose();
      parts.d_s += gu * disc.w.transpose() * h_pos.row(i).transpose();
    }
  }
  for (Eigen::Index j = 0; j < nn; ++j) {
    double d = sigmoid(neg_scores(j));
    double dc = std::min(std::max(d, kProbLo), kProbHi);
    loss -= std::log(1.0 - dc);
    if (d > kProbLo && d < kProbHi) {
      double gu = inv_n * d;
      parts.d_disc.noalias() += gu * h_neg.row(j).transpose() * s.transpose();
      parts.d_neg.row(j) += gu * ws.transpose();
      parts.d_s += gu * disc.w.transpose() * h_neg.row(j).transpose();
    }
  }
  parts.loss = loss * inv_n;
  return parts;
}

DgiGradients dgi_loss_and_grads(const MatrixXd& x, const MatrixXd& x_corrupt,
                                const SparseMat& prop, const GcnEncoder& enc,
                                const Discriminator& disc) {
  GcnForward pos_cache, neg_cache;
  MatrixXd h_pos = gcn_forward(prop, x, enc, &pos_cache);
  MatrixXd h_neg = gcn_forward(prop, x_corrupt, enc, &neg_cache);
  VectorXd s = readout(h_pos);

  DgiLossParts parts = dgi_loss(h_pos, h_neg, s, disc);

  // summary is the mean of positive rows
  MatrixXd d_pos = parts.d_pos;
  d_pos.rowwise() += parts.d_s.transpose() / static_cast<double>(h_pos.rows());

  DgiGradients g;
  g.loss = parts.loss;
  g.d_disc = parts.d_disc;
  g.d_weights.assign(enc.weights.size(), MatrixXd());
  for (size_t l = 0; l < enc.weights.size(); ++l)
    g.d_weights[l] = MatrixXd::Zero(enc.weights[l].rows(), enc.weights[l].cols());
  gcn_backward(prop, enc, pos_cache, std::move(d_pos), g.d_weights);
  gcn_backward(prop, enc, neg_cache, parts.d_neg, g.d_weights);
  return g;
}

GcnEncoder init_gcn_encoder(int input_dim, int d1, int layers, Activation act, Rng& rng) {
  if (layers < 1) throw Error("init_gcn_encoder: need at least one layer");
  GcnEncoder enc;
  enc.act = act;
  int in = input_dim;
  for (int l = 0; l < layers; ++l) {
    int out = d1;  // hidden widths equal the output dimension
    double scale = 1.0 / std::sqrt(static_cast<double>(in));
    MatrixXd w(in, out);
    for (int r = 0; r < in; ++r)
      for (int c = 0; c < out; ++c) w(r, c) = rng.uniform(-scale, scale);
    enc.weights.push_back(std::move(w));
    in = out;
  }
  return enc;
}

Discriminator init_discriminator(int d1, Rng& rng) {
  Discriminator disc;
  double scale = 1.0 / std::sqrt(static_cast<double>(d1));
  disc.w.resize(d1, d1);
  for (int r = 0; r < d1; ++r)
    for (int c = 0; c < d1; ++c) disc.w(r, c) = rng.uniform(-scale, scale);
  return disc;
}

DgiResult train_dgi(const SparseMat& adjacency, const MatrixXd& x, const DgiConfig& cfg) {
  SparseMat prop = normalized_propagation(adjacency);
  Rng init_rng(derive_seed(cfg.seed, 0xD61));
  DgiResult res;
  res.encoder = init_gcn_encoder(static_cast<int>(x.cols()), cfg.d1, cfg.layers, cfg.act, init_rng);
  res.disc = init_discriminator(cfg.d1, init_rng);

  std::vector<AdamState> w_states(res.encoder.weights.size());
  AdamState disc_state;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng noise_rng(derive_seed(cfg.seed, 0xC0FF + static_cast<uint64_t>(epoch)));
    MatrixXd x_neg = corrupt_features(x, cfg.sigma_noise, noise_rng);
    DgiGradients g = dgi_loss_and_grads(x, x_neg, prop, res.encoder, res.disc);
    if (!std::isfinite(g.loss))
      throw Error("train_dgi: divergence at epoch " + std::to_string(epoch));
    res.loss_trace.push_back(g.loss);
    for (size_t l = 0; l < res.encoder.weights.size(); ++l)
      adam_step(res.encoder.weights[l], g.d_weights[l], w_states[l], cfg.lr);
    adam_step(res.disc.w, g.d_disc, disc_state, cfg.lr);
  }

  res.h = res.encoder.encode(prop, x);
  return res;
}

DgiResult train_dgi(const CitationNetwork& net, const MatrixXd& x, const DgiConfig& cfg) {
  return train_dgi(net.adjacency(), x, cfg);
}

void export_node_representations(const std::string& path, const CitationNetwork& net,
                                 const MatrixXd& h) {
  if (h.rows() != net.n1()) throw Error("export_node_representations: row count mismatch");
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  for (int v = 0; v < net.n1(); ++v) {
    out << net.paper_at(v).id;
    for (Eigen::Index c = 0; c < h.cols(); ++c) out << " " << fmt_g17(h(v, c));
    out << "\n";
  }
}

void save_node_repr(const GcnEncoder& enc, const Discriminator& disc, const std::string& path) {
  BinWriter w(path);
  w.header(ModelKind::NodeRepr);
  w.u32(static_cast<uint32_t>(enc.act));
  w.u64(enc.weights.size());
  for (const MatrixXd& m : enc.weights) w.matrix(m);
  w.matrix(disc.w);
}

void load_node_repr(const std::string& path, GcnEncoder* enc, Discriminator* disc) {
  BinReader r(path);
  r.header(ModelKind::NodeRepr);
  enc->act = static_cast<Activation>(r.u32());
  enc->weights.clear();
  uint64_t n = r.u64();
  for (uint64_t i = 0; i < n; ++i) enc->weights.push_back(r.matrix());
  disc->w = r.matrix();
}

}  // namespace glad
