#include "glad/text_embed.hpp"

#include "glad/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace glad {

namespace {

// Token indices per document, out-of-vocabulary tokens dropped.
std::vector<std::vector<int>> index_corpus(const TokenCorpus& corpus, const Vocabulary& vocab) {
  std::vector<std::vector<int>> out(corpus.size());
  for (size_t d = 0; d < corpus.size(); ++d) {
    out[d].reserve(corpus[d].size());
    for (const std::string& w : corpus[d]) {
      int idx = vocab.lookup(w);
      if (idx >= 0) out[d].push_back(idx);
    }
  }
  return out;
}

struct Window {
  int doc;
  int pos;  // centre position within the indexed document
};

std::vector<Window> collect_windows(const std::vector<std::vector<int>>& docs, int win,
                                    std::vector<int>* short_docs) {
  std::vector<Window> windows;
  for (size_t d = 0; d < docs.size(); ++d) {
    int m = static_cast<int>(docs[d].size());
    if (m < 2 * win + 1) {
      if (short_docs) short_docs->push_back(static_cast<int>(d));
      continue;
    }
    for (int t = win; t <= m - win - 1; ++t) windows.push_back({static_cast<int>(d), t});
  }
  return windows;
}

VectorXd softmax(const VectorXd& logits) {
  double mx = logits.maxCoeff();
  VectorXd e = (logits.array() - mx).exp();
  return e / e.sum();
}

// Context vector: average of the 2*win word vectors around the centre and
// the document vector.
VectorXd context_average(const PvdmModel& m, const std::vector<int>& doc_tokens, int doc,
                         int pos) {
  const double denom = 2.0 * m.win + 1.0;
  VectorXd a = m.doc_vecs.row(doc);
  for (int off = -m.win; off <= m.win; ++off) {
    if (off == 0) continue;
    a += m.word_vecs.row(doc_tokens[static_cast<size_t>(pos + off)]);
  }
  return a / denom;
}

}  // namespace

Vocabulary build_vocab(const TokenCorpus& corpus, int min_count) {
  std::map<std::string, long> counts;
  for (const TokenDoc& doc : corpus)
    for (const std::string& w : doc) counts[w] += 1;

  std::vector<std::pair<std::string, long>> kept;
  for (const auto& [w, c] : counts)
    if (c >= min_count) kept.emplace_back(w, c);
  if (kept.empty()) throw Error("build_vocab: empty vocabulary after min_count filter");

  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary vocab;
  for (size_t i = 0; i < kept.size(); ++i) {
    vocab.index.emplace(kept[i].first, static_cast<int>(i));
    vocab.words.push_back(kept[i].first);
    vocab.counts.push_back(kept[i].second);
  }
  return vocab;
}

void export_vocabulary(const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  for (int i = 0; i < vocab.size(); ++i)
    out << vocab.words[static_cast<size_t>(i)] << " " << vocab.counts[static_cast<size_t>(i)]
        << "\n";
}

PvdmModel train_pvdm(const TokenCorpus& corpus, const Vocabulary& vocab,
                     const PvdmConfig& cfg) {
  if (cfg.p < 1) throw Error("train_pvdm: p must be >= 1");
  if (cfg.win < 1) throw Error("train_pvdm: win must be >= 1");

  PvdmModel model;
  model.vocab = vocab;
  model.p = cfg.p;
  model.win = cfg.win;

  const int n_docs = static_cast<int>(corpus.size());
  const int n_words = vocab.size();
  Rng rng(derive_seed(cfg.seed, 0x7E87));
  auto init = [&](MatrixXd& m, int rows, int cols) {
    m.resize(rows, cols);
    double scale = 0.5 / static_cast<double>(cfg.p);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-scale, scale);
  };
  init(model.doc_vecs, n_docs, cfg.p);
  init(model.word_vecs, n_words, cfg.p);
  init(model.softmax_w, n_words, cfg.p);
  model.softmax_b = VectorXd::Zero(n_words);

  auto docs = index_corpus(corpus, vocab);
  std::vector<Window> windows = collect_windows(docs, cfg.win, &model.docs_without_windows);
  std::vector<bool> trained(static_cast<size_t>(n_docs), false);
  for (const Window& w : windows) trained[static_cast<size_t>(w.doc)] = true;

  const double denom = 2.0 * cfg.win + 1.0;
  const double lr_min = 1e-4;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double frac = cfg.epochs > 1 ? static_cast<double>(epoch) / cfg.epochs : 0.0;
    double lr = cfg.lr * (1.0 - frac) + lr_min * frac;
    rng.shuffle(windows);

    double ll_sum = 0.0;
    for (const Window& w : windows) {
      const std::vector<int>& toks = docs[static_cast<size_t>(w.doc)];
      int target = toks[static_cast<size_t>(w.pos)];
      VectorXd a = context_average(model, toks, w.doc, w.pos);
      VectorXd logits = model.softmax_w * a + model.softmax_b;
      VectorXd prob = softmax(logits);
      ll_sum += std::log(std::max(prob(target), 1e-300));

      // gradient ascent on log p(target | context)
      VectorXd dz = -prob;
      dz(target) += 1.0;
      VectorXd da = model.softmax_w.transpose() * dz;
      model.softmax_w.noalias() += lr * dz * a.transpose();
      model.softmax_b += lr * dz;
      VectorXd step = (lr / denom) * da;
      model.doc_vecs.row(w.doc) += step.transpose();
      for (int off = -cfg.win; off <= cfg.win; ++off) {
        if (off == 0) continue;
        model.word_vecs.row(toks[static_cast<size_t>(w.pos + off)]) += step.transpose();
      }
    }
    double mean_ll = windows.empty() ? 0.0 : ll_sum / static_cast<double>(windows.size());
    if (!std::isfinite(mean_ll))
      throw Error("train_pvdm: divergence at epoch " + std::to_string(epoch));
    model.epoch_log_likelihood.push_back(mean_ll);
  }

  // Documents that received no window update keep no learned signal; their
  // vectors are zeroed so downstream consumers see them as absent text.
  for (int d = 0; d < n_docs; ++d)
    if (!trained[static_cast<size_t>(d)]) model.doc_vecs.row(d).setZero();
  return model;
}

PvdmGradients pvdm_loss_and_grads(const PvdmModel& model, const TokenCorpus& corpus) {
  auto docs = index_corpus(corpus, model.vocab);
  std::vector<Window> windows = collect_windows(docs, model.win, nullptr);

  PvdmGradients g;
  g.d_doc = MatrixXd::Zero(model.doc_vecs.rows(), model.p);
  g.d_word = MatrixXd::Zero(model.word_vecs.rows(), model.p);
  g.d_softmax_w = MatrixXd::Zero(model.softmax_w.rows(), model.p);
  g.d_softmax_b = VectorXd::Zero(model.softmax_b.size());
  g.window_count = static_cast<long>(windows.size());
  if (windows.empty()) return g;

  const double denom = 2.0 * model.win + 1.0;
  const double scale = 1.0 / static_cast<double>(windows.size());
  double ll_sum = 0.0;
  for (const Window& w : windows) {
    const std::vector<int>& toks = docs[static_cast<size_t>(w.doc)];
    int target = toks[static_cast<size_t>(w.pos)];
    VectorXd a = context_average(model, toks, w.doc, w.pos);
    VectorXd prob = softmax(model.softmax_w * a + model.softmax_b);
    ll_sum += std::log(std::max(prob(target), 1e-300));

    VectorXd dz = -prob;
    dz(target) += 1.0;
    dz *= scale;
    VectorXd da = model.softmax_w.transpose() * dz;
    g.d_softmax_w.noalias() += dz * a.transpose();
    g.d_softmax_b += dz;
    VectorXd share = da / denom;
    g.d_doc.row(w.doc) += share.transpose();
    for (int off = -model.win; off <= model.win; ++off) {
      if (off == 0) continue;
      g.d_word.row(toks[static_cast<size_t>(w.pos + off)]) += share.transpose();
    }
  }
  g.mean_log_likelihood = ll_sum * scale;
  return g;
}

double pvdm_log_likelihood(const PvdmModel& model, const TokenCorpus& corpus) {
  auto docs = index_corpus(corpus, model.vocab);
  std::vector<Window> windows = collect_windows(docs, model.win, nullptr);
  if (windows.empty()) return 0.0;
  double ll_sum = 0.0;
  for (const Window& w : windows) {
    const std::vector<int>& toks = docs[static_cast<size_t>(w.doc)];
    int target = toks[static_cast<size_t>(w.pos)];
    VectorXd a = context_average(model, toks, w.doc, w.pos);
    VectorXd prob = softmax(model.softmax_w * a + model.softmax_b);
    ll_sum += std::log(std::max(prob(target), 1e-300));
  }
  return ll_sum / static_cast<double>(windows.size());
}

VectorXd context_embedding(const PvdmModel& model, const std::string& text) {
  VectorXd acc = VectorXd::Zero(model.p);
  int hits = 0;
  for (const std::string& tok : tokenize(text)) {
    int idx = model.vocab.lookup(tok);
    if (idx < 0) continue;
    acc += model.word_vecs.row(idx).transpose();
    ++hits;
  }
  if (hits > 0) acc /= static_cast<double>(hits);
  return acc;
}

VectorXd infer_document(const PvdmModel& model, const TokenDoc& tokens, int epochs, double lr,
                        uint64_t seed) {
  std::vector<int> toks;
  for (const std::string& w : tokens) {
    int idx = model.vocab.lookup(w);
    if (idx >= 0) toks.push_back(idx);
  }
  int m = static_cast<int>(toks.size());
  if (m < 2 * model.win + 1) return VectorXd::Zero(model.p);

  Rng rng(derive_seed(seed, 0x1D0C));
  VectorXd d(model.p);
  double scale = 0.5 / static_cast<double>(model.p);
  for (int i = 0; i < model.p; ++i) d(i) = rng.uniform(-scale, scale);

  const double denom = 2.0 * model.win + 1.0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (int t = model.win; t <= m - model.win - 1; ++t) {
      VectorXd a = d;
      for (int off = -model.win; off <= model.win; ++off) {
        if (off == 0) continue;
        a += model.word_vecs.row(toks[static_cast<size_t>(t + off)]).transpose();
      }
      a /= denom;
      VectorXd prob = softmax(model.softmax_w * a + model.softmax_b);
      VectorXd dz = -prob;
      dz(toks[static_cast<size_t>(t)]) += 1.0;
      VectorXd da = model.softmax_w.transpose() * dz;
      d += (lr / denom) * da;
    }
  }
  return d;
}

void write_pvdm(BinWriter& w, const PvdmModel& model) {
  w.u64(static_cast<uint64_t>(model.vocab.size()));
  w.u32(static_cast<uint32_t>(model.p));
  w.u32(static_cast<uint32_t>(model.win));
  for (int i = 0; i < model.vocab.size(); ++i) {
    w.str(model.vocab.words[static_cast<size_t>(i)]);
    w.i64(model.vocab.counts[static_cast<size_t>(i)]);
  }
  w.matrix(model.doc_vecs);
  w.matrix(model.word_vecs);
  w.matrix(model.softmax_w);
  w.vector(model.softmax_b);
  w.u64(static_cast<uint64_t>(model.docs_without_windows.size()));
  for (int d : model.docs_without_windows) w.i64(d);
}

PvdmModel read_pvdm(BinReader& r) {
  PvdmModel model;
  uint64_t n_words = r.u64();
  model.p = static_cast<int>(r.u32());
  model.win = static_cast<int>(r.u32());
  for (uint64_t i = 0; i < n_words; ++i) {
    std::string word = r.str();
    long count = static_cast<long>(r.i64());
    model.vocab.index.emplace(word, static_cast<int>(i));
    model.vocab.words.push_back(word);
    model.vocab.counts.push_back(count);
  }
  model.doc_vecs = r.matrix();
  model.word_vecs = r.matrix();
  model.softmax_w = r.matrix();
  model.softmax_b = r.vector();
  uint64_t n_short = r.u64();
  for (uint64_t i = 0; i < n_short; ++i)
    model.docs_without_windows.push_back(static_cast<int>(r.i64()));
  return model;
}

void save_pvdm(const PvdmModel& model, const std::string& path) {
  BinWriter w(path);
  w.header(ModelKind::Pvdm);
  write_pvdm(w, model);
}

PvdmModel load_pvdm(const std::string& path) {
  BinReader r(path);
  r.header(ModelKind::Pvdm);
  return read_pvdm(r);
}

}  // namespace glad
