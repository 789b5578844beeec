#pragma once

#include "glad/graph.hpp"
#include "glad/purpose.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace glad {

// Column order of the edge feature matrix.
inline constexpr std::array<const char*, 8> kEdgeFeatureNames = {"CP", "SF", "SJ", "JF",
                                                                 "SI", "SR", "AC", "CB"};
inline constexpr int kEdgeFeatureDim = 8;

using PurposeFn = std::function<PurposeCategory(const std::string& context)>;

struct EdgeFeatureResult {
  MatrixXd z;                            // n2 x 8, edge-list row order
  std::vector<int> empty_reference_rows; // edges whose citing paper lists no references
};

// Hand-crafted relation features per citation:
//   CP  citation purpose is clear (from the classifier)
//   SF  author sets of citing and cited papers intersect
//   SJ  same journal
//   JF  fraction of the citing paper's references published in the cited
//       paper's journal
//   SI  first authors' institution sets intersect (institutions stamped on
//       papers they first-authored)
//   SR  reference lists intersect
//   AC  two distinct authors, one from each side, co-authored a third paper
//   CB  the cited paper's first author already cited the citing paper's
//       first author in some edge no newer than the citing paper
EdgeFeatureResult compute_edge_features(const CitationNetwork& net, const PurposeFn& purpose);

void export_edge_features(const std::string& path, const MatrixXd& z);

// Fully sigmoid autoencoder; the encoder stack ends at the code layer and
// the decoder mirrors it back to the input width.
struct Autoencoder {
  std::vector<MatrixXd> weights;  // layer i: out_dim x in_dim
  std::vector<VectorXd> biases;
  int code_layer = 0;  // index one past the last encoder layer

  int input_dim() const { return weights.empty() ? 0 : static_cast<int>(weights.front().cols()); }
  int code_dim() const {
    return code_layer == 0 ? 0 : static_cast<int>(weights[static_cast<size_t>(code_layer) - 1].rows());
  }

  static Autoencoder init(int input_dim, const std::vector<int>& encoder_hidden, uint64_t seed);

  VectorXd encode(const VectorXd& z) const;
  MatrixXd encode_rows(const MatrixXd& z) const;
  MatrixXd reconstruct_rows(const MatrixXd& z) const;
};

// Squared Frobenius reconstruction error with analytic gradients for every
// layer's weights and biases.
struct AeGradients {
  double loss = 0.0;
  std::vector<MatrixXd> d_weights;
  std::vector<VectorXd> d_biases;
};

AeGradients reconstruction_loss(const MatrixXd& z, const Autoencoder& ae);

// Cached forward pass; acts[0] is the input, acts[l+1] the output of layer l.
struct AeForward {
  std::vector<MatrixXd> acts;
};

AeForward ae_forward(const MatrixXd& z, const Autoencoder& ae);

// Backward with gradients injected at the reconstruction output and/or the
// code layer (either may be empty).
AeGradients ae_backward(const AeForward& fwd, const Autoencoder& ae, const MatrixXd& d_recon,
                        const MatrixXd& d_code);

struct AeTrainResult {
  Autoencoder ae;
  MatrixXd h;  // code rows for the full input
  std::vector<double> loss_trace;  // mean squared reconstruction error per row
};

// Full-batch gradient descent with rate r on the per-row mean of the
// reconstruction error.
AeTrainResult train_autoencoder(const MatrixXd& z, const std::vector<int>& encoder_hidden,
                                double r, int epochs, uint64_t seed);

void save_autoencoder(const Autoencoder& ae, const std::string& path);
Autoencoder load_autoencoder(const std::string& path);

}  // namespace glad
