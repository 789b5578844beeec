#include "glad/edge_repr.hpp"

#include "glad/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace glad {

namespace {

bool intersects(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::unordered_set<std::string> set(a.begin(), a.end());
  for (const std::string& s : b)
    if (set.count(s)) return true;
  return false;
}

MatrixXd sigmoid_rows(const MatrixXd& m) {
  return m.unaryExpr([](double v) { return sigmoid(v); });
}

}  // namespace

EdgeFeatureResult compute_edge_features(const CitationNetwork& net, const PurposeFn& purpose) {
  const int n2 = net.n2();
  EdgeFeatureResult res;
  res.z.setZero(n2, kEdgeFeatureDim);

  // first author -> institutions of papers they first-authored
  std::unordered_map<std::string, std::set<std::string>> first_author_insts;
  // author -> papers they appear on (any position)
  std::unordered_map<std::string, std::vector<int>> author_papers;
  for (int v = 0; v < net.n1(); ++v) {
    const Paper& p = net.paper_at(v);
    for (const std::string& a : p.author_ids) author_papers[a].push_back(v);
    if (!p.author_ids.empty())
      first_author_insts[p.author_ids.front()].insert(p.institution_ids.begin(),
                                                      p.institution_ids.end());
  }
  // (cited-first-author, citing-first-author) -> earliest year of such an edge
  std::unordered_map<std::string, int> reverse_first_cite;
  auto pair_key = [](const std::string& a, const std::string& b) { return a + "\x1f" + b; };
  for (int e = 0; e < n2; ++e) {
    auto [sr, dr] = net.edge_endpoints(e);
    const Paper& src = net.paper_at(sr);
    const Paper& dst = net.paper_at(dr);
    if (src.author_ids.empty() || dst.author_ids.empty()) continue;
    std::string key = pair_key(src.author_ids.front(), dst.author_ids.front());
    auto it = reverse_first_cite.find(key);
    if (it == reverse_first_cite.end() || src.year < it->second)
      reverse_first_cite[key] = src.year;
  }

  for (int e = 0; e < n2; ++e) {
    auto [sr, dr] = net.edge_endpoints(e);
    const Paper& citing = net.paper_at(sr);
    const Paper& cited = net.paper_at(dr);
    const CitationEdge& edge = net.edges()[static_cast<size_t>(e)];

    double cp = static_cast<double>(cp_flag(purpose(edge.context)));
    double sf = intersects(citing.author_ids, cited.author_ids) ? 1.0 : 0.0;
    double sj = citing.journal_id == cited.journal_id ? 1.0 : 0.0;

    double jf = 0.0;
    if (citing.reference_ids.empty()) {
      res.empty_reference_rows.push_back(e);
    } else {
      long in_journal = 0;
      for (const std::string& ref : citing.reference_ids)
        if (net.paper_at(net.row_of(ref)).journal_id == cited.journal_id) ++in_journal;
      jf = static_cast<double>(in_journal) / static_cast<double>(citing.reference_ids.size());
    }

    double si = 0.0;
    if (!citing.author_ids.empty() && !cited.author_ids.empty()) {
      const auto& insts_a = first_author_insts[citing.author_ids.front()];
      const auto& insts_b = first_author_insts[cited.author_ids.front()];
      for (const std::string& inst : insts_a)
        if (insts_b.count(inst)) {
          si = 1.0;
          break;
        }
    }

    double sr_flag = intersects(citing.reference_ids, cited.reference_ids) ? 1.0 : 0.0;

    // collaboration on a third paper by two distinct authors
    double ac = 0.0;
    std::unordered_set<std::string> citing_authors(citing.author_ids.begin(),
                                                   citing.author_ids.end());
    for (const std::string& b : cited.author_ids) {
      if (ac > 0.0) break;
      auto it = author_papers.find(b);
      if (it == author_papers.end()) continue;
      for (int pv : it->second) {
        if (pv == sr || pv == dr) continue;
        const Paper& third = net.paper_at(pv);
        for (const std::string& a : third.author_ids) {
          if (a != b && citing_authors.count(a)) {
            ac = 1.0;
            break;
          }
        }
        if (ac > 0.0) break;
      }
    }

    double cb = 0.0;
    if (!citing.author_ids.empty() && !cited.author_ids.empty()) {
      auto it = reverse_first_cite.find(pair_key(cited.author_ids.front(),
                                                 citing.author_ids.front()));
      if (it != reverse_first_cite.end() && it->second <= citing.year) cb = 1.0;
    }

    res.z(e, 0) = cp;
    res.z(e, 1) = sf;
    res.z(e, 2) = sj;
    res.z(e, 3) = jf;
    res.z(e, 4) = si;
    res.z(e, 5) = sr_flag;
    res.z(e, 6) = ac;
    res.z(e, 7) = cb;
  }
  return res;
}

void export_edge_features(const std::string& path, const MatrixXd& z) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  for (size_t i = 0; i < kEdgeFeatureNames.size(); ++i)
    out << (i ? " " : "") << kEdgeFeatureNames[i];
  out << "\n";
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    for (Eigen::Index c = 0; c < z.cols(); ++c) out << (c ? " " : "") << fmt_g17(z(r, c));
    out << "\n";
  }
}

Autoencoder Autoencoder::init(int input_dim, const std::vector<int>& encoder_hidden,
                              uint64_t seed) {
  if (encoder_hidden.empty()) throw Error("autoencoder: empty architecture");
  Autoencoder ae;
  std::vector<int> dims;
  dims.push_back(input_dim);
  for (int h : encoder_hidden) dims.push_back(h);
  for (int i = static_cast<int>(encoder_hidden.size()) - 2; i >= 0; --i)
    dims.push_back(encoder_hidden[static_cast<size_t>(i)]);
  dims.push_back(input_dim);
  ae.code_layer = static_cast<int>(encoder_hidden.size());

  Rng rng(derive_seed(seed, 0xAE));
  for (size_t i = 0; i + 1 < dims.size(); ++i) {
    int in = dims[i], out = dims[i + 1];
    double scale = 1.0 / std::sqrt(static_cast<double>(in));
    MatrixXd w(out, in);
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) w(r, c) = rng.uniform(-scale, scale);
    ae.weights.push_back(std::move(w));
    VectorXd b(out);
    for (int r = 0; r < out; ++r) b(r) = rng.uniform(-scale, scale);
    ae.biases.push_back(std::move(b));
  }
  return ae;
}

VectorXd Autoencoder::encode(const VectorXd& z) const {
  if (z.size() != input_dim()) throw Error("autoencoder encode: dimension mismatch");
  VectorXd cur = z;
  for (int l = 0; l < code_layer; ++l) {
    cur = (weights[static_cast<size_t>(l)] * cur + biases[static_cast<size_t>(l)])
              .unaryExpr([](double v) { return sigmoid(v); });
  }
  return cur;
}

MatrixXd Autoencoder::encode_rows(const MatrixXd& z) const {
  if (z.cols() != input_dim()) throw Error("autoencoder encode: dimension mismatch");
  MatrixXd cur = z;
  for (int l = 0; l < code_layer; ++l) {
    MatrixXd pre = cur * weights[static_cast<size_t>(l)].transpose();
    pre.rowwise() += biases[static_cast<size_t>(l)].transpose();
    cur = sigmoid_rows(pre);
  }
  return cur;
}

MatrixXd Autoencoder::reconstruct_rows(const MatrixXd& z) const {
  MatrixXd cur = z;
  for (size_t l = 0; l < weights.size(); ++l) {
    MatrixXd pre = cur * weights[l].transpose();
    pre.rowwise() += biases[l].transpose();
    cur = sigmoid_rows(pre);
  }
  return cur;
}

AeForward ae_forward(const MatrixXd& z, const Autoencoder& ae) {
  if (z.cols() != ae.input_dim()) throw Error("ae_forward: dimension mismatch");
  AeForward fwd;
  fwd.acts.resize(ae.weights.size() + 1);
  fwd.acts[0] = z;
  for (size_t l = 0; l < ae.weights.size(); ++l) {
    MatrixXd pre = fwd.acts[l] * ae.weights[l].transpose();
    pre.rowwise() += ae.biases[l].transpose();
    fwd.acts[l + 1] = sigmoid_rows(pre);
  }
  return fwd;
}

AeGradients ae_backward(const AeForward& fwd, const Autoencoder& ae, const MatrixXd& d_recon,
                        const MatrixXd& d_code) {
  const size_t n_layers = ae.weights.size();
  AeGradients g;
  g.d_weights.resize(n_layers);
  g.d_biases.resize(n_layers);

  MatrixXd d_act = d_recon.size() > 0
                       ? d_recon
                       : MatrixXd::Zero(fwd.acts.back().rows(), fwd.acts.back().cols());
  for (size_t l = n_layers; l-- > 0;) {
    if (d_code.size() > 0 && static_cast<int>(l) + 1 == ae.code_layer)
      d_act += d_code;
    // sigmoid'(pre) = a (1 - a)
    MatrixXd d_pre =
        d_act.cwiseProduct(fwd.acts[l + 1].cwiseProduct((1.0 - fwd.acts[l + 1].array()).matrix()));
    g.d_weights[l] = d_pre.transpose() * fwd.acts[l];
    g.d_biases[l] = d_pre.colwise().sum().transpose();
    if (l > 0) d_act = d_pre * ae.weights[l];
  }
  return g;
}

AeGradients reconstruction_loss(const MatrixXd& z, const Autoencoder& ae) {
  if (z.cols() != ae.input_dim()) throw Error("reconstruction_loss: dimension mismatch");
  AeForward fwd = ae_forward(z, ae);
  MatrixXd diff = fwd.acts.back() - z;
  AeGradients g = ae_backward(fwd, ae, 2.0 * diff, MatrixXd());
  g.loss = diff.squaredNorm();
  return g;
}

AeTrainResult train_autoencoder(const MatrixXd& z, const std::vector<int>& encoder_hidden,
                                double r, int epochs, uint64_t seed) {
  if (z.rows() == 0) throw Error("train_autoencoder: empty input");
  AeTrainResult res;
  res.ae = Autoencoder::init(static_cast<int>(z.cols()), encoder_hidden, seed);
  const double inv_rows = 1.0 / static_cast<double>(z.rows());

  for (int epoch = 0; epoch < epochs; ++epoch) {
    AeGradients g = reconstruction_loss(z, res.ae);
    if (!std::isfinite(g.loss))
      throw Error("train_autoencoder: divergence at epoch " + std::to_string(epoch));
    res.loss_trace.push_back(g.loss * inv_rows);
    for (size_t l = 0; l < res.ae.weights.size(); ++l) {
      res.ae.weights[l] -= (r * inv_rows) * g.d_weights[l];
      res.ae.biases[l] -= (r * inv_rows) * g.d_biases[l];
    }
  }
  res.h = res.ae.encode_rows(z);
  return res;
}

void save_autoencoder(const Autoencoder& ae, const std::string& path) {
  BinWriter w(path);
  w.header(ModelKind::Autoencoder);
  w.u32(static_cast<uint32_t>(ae.code_layer));
  w.u64(ae.weights.size());
  for (size_t l = 0; l < ae.weights.size(); ++l) {
    w.matrix(ae.weights[l]);
    w.vector(ae.biases[l]);
  }
}

Autoencoder load_autoencoder(const std::string& path) {
  BinReader r(path);
  r.header(ModelKind::Autoencoder);
  Autoencoder ae;
  ae.code_layer = static_cast<int>(r.u32());
  uint64_t n = r.u64();
  for (uint64_t l = 0; l < n; ++l) {
    ae.weights.push_back(r.matrix());
    ae.biases.push_back(r.vector());
  }
  return ae;
}

}  // namespace glad
