#pragma once

#include "glad/common.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace glad {

// Fixed six-way citation purpose scheme; the first five categories count as
// a clear purpose.
enum class PurposeCategory : int {
  Criticizing = 1,
  Comparison = 2,
  Use = 3,
  Substantiating = 4,
  Basis = 5,
  Other = 6,
};

inline constexpr int kNumCategories = 6;

const char* category_name(PurposeCategory c);
std::optional<PurposeCategory> category_from_name(const std::string& name);

inline int cp_flag(PurposeCategory c) { return c == PurposeCategory::Other ? 0 : 1; }

struct ContextSample {
  VectorXd c;
  PurposeCategory label = PurposeCategory::Other;
};

enum class Kernel { Linear, Rbf };

struct SvmOptions {
  double R = 1.0;  // box constraint
  Kernel kernel = Kernel::Linear;
  double gamma = 0.5;  // RBF width
  double tol = 1e-3;   // KKT tolerance
  long max_iter = 100000;
  std::array<double, kNumCategories> class_r_scale = {1, 1, 1, 1, 1, 1};
  bool record_dual_trace = false;
};

// One binary soft-margin SVM in dual form.
struct BinarySvm {
  VectorXd alphas;
  double bias = 0.0;
  std::vector<int> support;  // indices with alpha > 0
  bool trained = false;      // false when the class had no positive samples
  long iterations = 0;
  double kkt_residual = 0.0;
  std::vector<double> dual_trace;  // filled when record_dual_trace is set
};

struct OvrSvmModel {
  MatrixXd inputs;                      // N x q, retained for kernel evaluation
  std::vector<PurposeCategory> labels;  // N
  SvmOptions opts;
  std::array<BinarySvm, kNumCategories> per_class;
};

double kernel_eval(Kernel kernel, double gamma, const VectorXd& a, const VectorXd& b);

// Solves the dual box-and-equality-constrained problem with SMO-style
// pairwise coordinate ascent. y entries are +/-1; box[i] is the upper bound
// for alpha_i.
BinarySvm train_binary_svm(const MatrixXd& x, const std::vector<int>& y,
                           const std::vector<double>& box, const SvmOptions& opts);

// One-vs-rest training over the six purpose categories. Requires at least
// two distinct labels; categories without positive samples get a constant
// negative decision value.
OvrSvmModel train_ovr_svm(const std::vector<ContextSample>& samples, const SvmOptions& opts);

double decision_value(const OvrSvmModel& model, PurposeCategory j, const VectorXd& c);
std::array<double, kNumCategories> decision_values(const OvrSvmModel& model, const VectorXd& c);

// Argmax of the decision values; ties go to the lowest class index.
PurposeCategory classify(const OvrSvmModel& model, const VectorXd& c);

// Single clear-vs-Other classifier for the binary CP mode.
struct BinaryCpModel {
  MatrixXd inputs;
  std::vector<int> y;  // +1 clear, -1 other
  SvmOptions opts;
  BinarySvm svm;
};

BinaryCpModel train_binary_cp(const std::vector<ContextSample>& samples, const SvmOptions& opts);
int binary_cp_flag(const BinaryCpModel& model, const VectorXd& c);

// Largest remaining KKT violation of a trained binary machine (0 means the
// conditions hold exactly at the stored tolerance-free margins).
double svm_kkt_residual(const BinarySvm& svm, const MatrixXd& x, const std::vector<int>& y,
                        const std::vector<double>& box, const SvmOptions& opts);

void save_purpose_model(const OvrSvmModel& model, const std::string& path);
OvrSvmModel load_purpose_model(const std::string& path);

class BinWriter;
class BinReader;
void write_ovr_svm(BinWriter& w, const OvrSvmModel& model);
OvrSvmModel read_ovr_svm(BinReader& r);

}  // namespace glad
