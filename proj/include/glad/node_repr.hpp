#pragma once

#include "glad/graph.hpp"
#include "glad/text_embed.hpp"

#include <vector>

namespace glad {

// Node feature matrix: document vector followed by the three centrality
// columns, which are z-scored in place.
struct NodeFeatureResult {
  MatrixXd x;                      // n1 x (p + 3)
  std::vector<int> zero_doc_rows;  // rows whose document vector is all zero
};

NodeFeatureResult assemble_node_features(const CitationNetwork& net, const PvdmModel& pvdm);

// Row-wise Gaussian corruption of the feature matrix; per-column noise std
// is sigma_noise times the column's std. Graph structure is untouched.
MatrixXd corrupt_features(const MatrixXd& x, double sigma_noise, Rng& rng);

// Symmetric-normalized propagation operator built from A + I.
SparseMat normalized_propagation(const SparseMat& adjacency);

enum class Activation { Relu, Identity, Tanh };

struct GcnEncoder {
  std::vector<MatrixXd> weights;  // layer l: in_dim x out_dim
  Activation act = Activation::Relu;

  int output_dim() const { return weights.empty() ? 0 : static_cast<int>(weights.back().cols()); }
  MatrixXd encode(const SparseMat& prop, const MatrixXd& x) const;
};

struct Discriminator {
  MatrixXd w;  // d1 x d1 bilinear scoring matrix
};

// Cached GCN forward pass plus the matching backward accumulation; shared by
// unsupervised training and the joint loop.
struct GcnForward {
  std::vector<MatrixXd> propagated;   // S_l = P * A_{l-1}
  std::vector<MatrixXd> preact;       // Z_l = S_l * W_l
  std::vector<MatrixXd> activations;  // A_l
};

MatrixXd gcn_forward(const SparseMat& prop, const MatrixXd& x, const GcnEncoder& enc,
                     GcnForward* cache);
void gcn_backward(const SparseMat& prop, const GcnEncoder& enc, const GcnForward& cache,
                  MatrixXd d_out, std::vector<MatrixXd>& d_weights);

// Mean of the positive patch representations.
VectorXd readout(const MatrixXd& h_positive);

// sigma(h^T W s), strictly inside (0,1).
double discriminate(const VectorXd& h, const VectorXd& s, const Discriminator& disc);

// Binary cross-entropy over positive and negative patch-summary pairs, with
// probabilities clamped to [1e-7, 1-1e-7] before the log. Gradients are
// reported for the discriminator and for every patch row and the summary.
struct DgiLossParts {
  double loss = 0.0;
  MatrixXd d_pos, d_neg;
  VectorXd d_s;
  MatrixXd d_disc;
};

DgiLossParts dgi_loss(const MatrixXd& h_pos, const MatrixXd& h_neg, const VectorXd& s,
                      const Discriminator& disc);

// Full loss with analytic gradients for every encoder layer and the
// discriminator; the summary is read out from the positive branch.
struct DgiGradients {
  double loss = 0.0;
  std::vector<MatrixXd> d_weights;
  MatrixXd d_disc;
};

DgiGradients dgi_loss_and_grads(const MatrixXd& x, const MatrixXd& x_corrupt,
                                const SparseMat& prop, const GcnEncoder& enc,
                                const Discriminator& disc);

struct DgiConfig {
  int d1 = 64;
  int layers = 1;
  double lr = 0.01;
  int epochs = 100;
  double sigma_noise = 1.0;
  Activation act = Activation::Relu;
  uint64_t seed = 1;
};

struct DgiResult {
  GcnEncoder encoder;
  Discriminator disc;
  MatrixXd h;  // final representations over the uncorrupted input
  std::vector<double> loss_trace;
};

GcnEncoder init_gcn_encoder(int input_dim, int d1, int layers, Activation act, Rng& rng);
Discriminator init_discriminator(int d1, Rng& rng);

DgiResult train_dgi(const SparseMat& adjacency, const MatrixXd& x, const DgiConfig& cfg);
DgiResult train_dgi(const CitationNetwork& net, const MatrixXd& x, const DgiConfig& cfg);

void export_node_representations(const std::string& path, const CitationNetwork& net,
                                 const MatrixXd& h);

void save_node_repr(const GcnEncoder& enc, const Discriminator& disc, const std::string& path);
void load_node_repr(const std::string& path, GcnEncoder* enc, Discriminator* disc);

}  // namespace glad
