#include "glad/common.hpp"

#include <cctype>
#include <cstdio>

namespace glad {

void adam_step(MatrixXd& param, const MatrixXd& grad, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
  if (state.t == 0) {
    state.m = MatrixXd::Zero(param.rows(), param.cols());
    state.v = MatrixXd::Zero(param.rows(), param.cols());
  }
  state.t += 1;
  state.m = beta1 * state.m + (1.0 - beta1) * grad;
  state.v = beta2 * state.v + (1.0 - beta2) * grad.cwiseProduct(grad);
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  MatrixXd mhat = state.m / bc1;
  MatrixXd vhat = state.v / bc2;
  param.array() -= lr * mhat.array() / (vhat.array().sqrt() + eps);
}

void adam_step(VectorXd& param, const VectorXd& grad, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
  MatrixXd p = param;
  adam_step(p, MatrixXd(grad), state, lr, beta1, beta2, eps);
  param = p.col(0);
}

std::string fmt_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char ch : text) {
    if (std::isalnum(ch)) {
      cur.push_back(static_cast<char>(std::tolower(ch)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace glad
