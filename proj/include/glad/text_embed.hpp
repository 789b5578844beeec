#pragma once

#include "glad/common.hpp"

#include <string>
#include <unordered_map>
#include <vector>

namespace glad {

using TokenDoc = std::vector<std::string>;
using TokenCorpus = std::vector<TokenDoc>;

struct Vocabulary {
  std::unordered_map<std::string, int> index;
  std::vector<std::string> words;  // index -> word
  std::vector<long> counts;        // index -> corpus count

  int size() const { return static_cast<int>(words.size()); }
  int lookup(const std::string& w) const {
    auto it = index.find(w);
    return it == index.end() ? -1 : it->second;
  }
};

// Words below min_count are dropped; indices ordered by descending count,
// ties broken lexicographically.
Vocabulary build_vocab(const TokenCorpus& corpus, int min_count);

void export_vocabulary(const Vocabulary& vocab, const std::string& path);

struct PvdmConfig {
  int p = 64;          // document/word vector dimension (p = q)
  int win = 2;         // window radius
  int epochs = 50;
  double lr = 0.025;   // linearly decayed
  uint64_t seed = 1;
};

// Distributed-memory paragraph vectors: a document vector and the window's
// word vectors are averaged and projected through a full softmax over the
// vocabulary to predict the centre word.
struct PvdmModel {
  Vocabulary vocab;
  int p = 0;
  int win = 0;
  MatrixXd doc_vecs;    // n_docs x p, row order = corpus order
  MatrixXd word_vecs;   // N_w x p
  MatrixXd softmax_w;   // N_w x p
  VectorXd softmax_b;   // N_w

  std::vector<double> epoch_log_likelihood;  // per-epoch mean log-likelihood
  std::vector<int> docs_without_windows;     // too short for a full window

  int doc_count() const { return static_cast<int>(doc_vecs.rows()); }
};

PvdmModel train_pvdm(const TokenCorpus& corpus, const Vocabulary& vocab,
                     const PvdmConfig& cfg);

// Mean log-likelihood over all full windows in the corpus plus its exact
// gradient for every parameter (ascent direction).
struct PvdmGradients {
  double mean_log_likelihood = 0.0;
  long window_count = 0;
  MatrixXd d_doc, d_word, d_softmax_w;
  VectorXd d_softmax_b;
};

PvdmGradients pvdm_loss_and_grads(const PvdmModel& model, const TokenCorpus& corpus);
double pvdm_log_likelihood(const PvdmModel& model, const TokenCorpus& corpus);

// Average of in-vocabulary word vectors; zero vector when nothing matches.
VectorXd context_embedding(const PvdmModel& model, const std::string& text);

// Document vector for unseen text: a fresh row is trained with word and
// softmax parameters frozen.
VectorXd infer_document(const PvdmModel& model, const TokenDoc& tokens, int epochs = 10,
                        double lr = 0.025, uint64_t seed = 1);

void save_pvdm(const PvdmModel& model, const std::string& path);
PvdmModel load_pvdm(const std::string& path);

// In-container forms, for bundles that embed the model as a section.
class BinWriter;
class BinReader;
void write_pvdm(BinWriter& w, const PvdmModel& model);
PvdmModel read_pvdm(BinReader& r);

}  // namespace glad
