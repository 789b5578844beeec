#pragma once

#include "glad/edge_repr.hpp"
#include "glad/graph.hpp"
#include "glad/node_repr.hpp"

#include <string>
#include <vector>

namespace glad {

// Ablation variants: node-only, edge-only, random substituted inputs,
// dropped unsupervised loss terms, and the all-autoencoder node branch.
enum class Variant {
  GLAD,
  GLAD_N,
  GLAD_E,
  GLAD_RN,
  GLAD_RE,
  GLAD_EL,
  GLAD_NL,
  GLAD_EE,
};

inline constexpr std::array<Variant, 8> kAllVariants = {
    Variant::GLAD,    Variant::GLAD_N,  Variant::GLAD_E,  Variant::GLAD_RN,
    Variant::GLAD_RE, Variant::GLAD_EL, Variant::GLAD_NL, Variant::GLAD_EE};

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

inline bool uses_node_branch(Variant v) { return v != Variant::GLAD_E; }
inline bool uses_edge_branch(Variant v) { return v != Variant::GLAD_N; }
inline bool uses_dgi(Variant v) { return uses_node_branch(v) && v != Variant::GLAD_EE; }

enum class LrLossMode { Mae, Bce };

struct TrainConfig {
  double alpha = 1e-4;       // weight of the parameter regularizer
  double beta = 1.0;         // weight of the classification loss
  double pretrain_lr = 0.01; // r, used by both pretraining phases
  double lr = 0.01;          // joint Adam rate
  int batch_size = 4;
  double epsilon = 1e-4;     // relative L_sum change, sustained 5 steps
  int max_epochs = 300;      // joint steps
  uint64_t seed = 1;
  Variant variant = Variant::GLAD;
  LrLossMode lr_loss_mode = LrLossMode::Mae;
  int d1 = 64;
  int gcn_layers = 1;
  Activation activation = Activation::Relu;
  double sigma_noise = 1.0;
  int dgi_pretrain_epochs = 100;
  std::vector<int> ae_hidden = {8, 10};
  int ae_pretrain_epochs = 200;

  int d2() const { return ae_hidden.empty() ? 0 : ae_hidden.back(); }
  bool operator==(const TrainConfig&) const = default;
};

struct LrHead {
  VectorXd w;
  double b = 0.0;
};

struct LabeledEdge {
  int edge = 0;   // index into net.edges()
  int label = 0;  // 0 or 1
};

// [h_i | h_j | h_e] per edge, rows in edge order.
MatrixXd pair_representation(const MatrixXd& hn, const MatrixXd& he,
                             const std::vector<std::pair<int, int>>& endpoints);

struct LrLossResult {
  double loss = 0.0;
  VectorXd d_w;
  double d_b = 0.0;
  MatrixXd d_pairs;
};

// Mean absolute difference between labels and sigmoid scores (default), or
// binary cross-entropy; analytic gradients in both modes.
LrLossResult lr_loss(const MatrixXd& pairs, const std::vector<int>& labels, const LrHead& head,
                     LrLossMode mode);

// Frobenius-squared regularizer over autoencoder weights and biases plus GCN
// layer weights (the LR head and discriminator stay unregularized).
double regularization_term(const std::vector<MatrixXd>& ae_weights,
                           const std::vector<VectorXd>& ae_biases,
                           const std::vector<MatrixXd>& gcn_weights);

inline double joint_loss(double l_n, double l_e, double l_lr, double reg_sum, double alpha,
                         double beta) {
  return l_n + l_e + beta * l_lr + alpha * reg_sum;
}

struct JointModel {
  TrainConfig config;
  GcnEncoder encoder;
  Discriminator disc;
  Autoencoder edge_ae;
  Autoencoder node_ae;  // GLAD_EE only
  LrHead head;
  MatrixXd hn, he;  // final representations over the (possibly substituted) inputs

  std::vector<double> node_pretrain_trace, edge_pretrain_trace, joint_trace;
  int joint_steps = 0;

  int pair_dim() const;
};

JointModel train_glad(const CitationNetwork& net, const MatrixXd& x, const MatrixXd& z,
                      const std::vector<LabeledEdge>& y_l, const TrainConfig& cfg);

struct Prediction {
  std::string src, dst;
  double score = 0.0;
  int label_hat = 0;
};

std::vector<Prediction> predict_edges(const JointModel& model, const CitationNetwork& net,
                                      const std::vector<int>& edge_indices);
std::vector<Prediction> predict(const JointModel& model, const CitationNetwork& net,
                                const std::vector<std::pair<std::string, std::string>>& edges);

void save_joint_model(const JointModel& model, const std::string& path);
JointModel load_joint_model(const std::string& path);

class BinWriter;
class BinReader;
void write_joint_model(BinWriter& w, const JointModel& model);
JointModel read_joint_model(BinReader& r);

}  // namespace glad
