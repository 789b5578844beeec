#include "glad/purpose.hpp"

#include "glad/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace glad {

namespace {

const char* kCategoryNames[kNumCategories] = {"Criticizing", "Comparison",     "Use",
                                              "Substantiating", "Basis", "Other"};

// SMO working state with a lazily filled kernel-row cache.
class SmoSolver {
 public:
  SmoSolver(const MatrixXd& x, const std::vector<int>& y, const std::vector<double>& box,
            const SvmOptions& opts)
      : x_(x), y_(y), box_(box), opts_(opts), n_(static_cast<int>(y.size())) {
    alphas_ = VectorXd::Zero(n_);
    errors_.assign(static_cast<size_t>(n_), 0.0);
    for (int i = 0; i < n_; ++i) errors_[static_cast<size_t>(i)] = -static_cast<double>(y_[i]);
    rows_.resize(static_cast<size_t>(n_));
  }

  BinarySvm solve() {
    BinarySvm out;
    long steps = 0;
    int num_changed = 0;
    bool examine_all = true;
    while ((num_changed > 0 || examine_all) && steps < opts_.max_iter) {
      num_changed = 0;
      for (int i = 0; i < n_ && steps < opts_.max_iter; ++i) {
        if (!examine_all && !is_free(i)) continue;
        int changed = examine(i);
        num_changed += changed;
        steps += changed;
        if (changed && opts_.record_dual_trace) out.dual_trace.push_back(dual_objective());
      }
      if (examine_all) {
        examine_all = false;
      } else if (num_changed == 0) {
        examine_all = true;
      }
    }
    out.iterations = steps;
    out.kkt_residual = residual();
    if (out.kkt_residual > opts_.tol && steps >= opts_.max_iter)
      throw Error("svm: no convergence after " + std::to_string(steps) +
                  " steps, KKT residual " + fmt_g17(out.kkt_residual));
    out.alphas = alphas_;
    out.bias = bias_;
    for (int i = 0; i < n_; ++i)
      if (alphas_(i) > 1e-12) out.support.push_back(i);
    out.trained = true;
    return out;
  }

  double dual_objective() const {
    // W(alpha) = sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij, using
    // the cached errors: sum_j alpha_j y_j K_ij = E_i + y_i - b.
    double lin = alphas_.sum();
    double quad = 0.0;
    for (int i = 0; i < n_; ++i)
      if (alphas_(i) > 0.0)
        quad += alphas_(i) * y_[static_cast<size_t>(i)] *
                (errors_[static_cast<size_t>(i)] + y_[static_cast<size_t>(i)] - bias_);
    return lin - 0.5 * quad;
  }

  double residual() const {
    double worst = 0.0;
    for (int i = 0; i < n_; ++i) {
      double ye = y_[static_cast<size_t>(i)] * errors_[static_cast<size_t>(i)];
      if (alphas_(i) < box_[static_cast<size_t>(i)] - 1e-12) worst = std::max(worst, -ye);
      if (alphas_(i) > 1e-12) worst = std::max(worst, ye);
    }
    return worst;
  }

 private:
  bool is_free(int i) const {
    return alphas_(i) > 1e-12 && alphas_(i) < box_[static_cast<size_t>(i)] - 1e-12;
  }

  const VectorXd& kernel_row(int i) {
    auto& row = rows_[static_cast<size_t>(i)];
    if (!row) {
      row = std::make_unique<VectorXd>(n_);
      for (int j = 0; j < n_; ++j)
        (*row)(j) = kernel_eval(opts_.kernel, opts_.gamma, x_.row(i).transpose(),
                                x_.row(j).transpose());
    }
    return *row;
  }

  int examine(int i2) {
    double y2 = y_[static_cast<size_t>(i2)];
    double e2 = errors_[static_cast<size_t>(i2)];
    double r2 = y2 * e2;
    bool violated = (r2 < -opts_.tol && alphas_(i2) < box_[static_cast<size_t>(i2)] - 1e-12) ||
                    (r2 > opts_.tol && alphas_(i2) > 1e-12);
    if (!violated) return 0;

    // second-choice heuristic: largest |E1 - E2| over free points
    int best = -1;
    double best_gap = -1.0;
    for (int i = 0; i < n_; ++i) {
      if (!is_free(i)) continue;
      double gap = std::abs(errors_[static_cast<size_t>(i)] - e2);
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best >= 0 && take_step(best, i2)) return 1;

    // deterministic rotating sweeps: free points, then everything
    for (int off = 0; off < n_; ++off) {
      int i1 = (sweep_start_ + off) % n_;
      if (is_free(i1) && take_step(i1, i2)) {
        sweep_start_ = (i1 + 1) % n_;
        return 1;
      }
    }
    for (int off = 0; off < n_; ++off) {
      int i1 = (sweep_start_ + off) % n_;
      if (take_step(i1, i2)) {
        sweep_start_ = (i1 + 1) % n_;
        return 1;
      }
    }
    return 0;
  }

  bool take_step(int i1, int i2) {
    if (i1 == i2) return false;
    double a1 = alphas_(i1), a2 = alphas_(i2);
    double y1 = y_[static_cast<size_t>(i1)], y2 = y_[static_cast<size_t>(i2)];
    double e1 = errors_[static_cast<size_t>(i1)], e2 = errors_[static_cast<size_t>(i2)];
    double c1 = box_[static_cast<size_t>(i1)], c2 = box_[static_cast<size_t>(i2)];
    double s = y1 * y2;

    double lo, hi;
    if (s < 0.0) {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(c2, c1 + a2 - a1);
    } else {
      lo = std::max(0.0, a1 + a2 - c1);
      hi = std::min(c2, a1 + a2);
    }
    if (lo >= hi - 1e-14) return false;

    const VectorXd& k1 = kernel_row(i1);
    const VectorXd& k2 = kernel_row(i2);
    double k11 = k1(i1), k22 = k2(i2), k12 = k1(i2);
    double eta = k11 + k22 - 2.0 * k12;

    double a2_new;
    if (eta > 1e-14) {
      a2_new = a2 + y2 * (e1 - e2) / eta;
      a2_new = std::min(std::max(a2_new, lo), hi);
    } else {
      // flat direction: evaluate the (minimized) objective at both ends
      double f1 = y1 * (e1 - bias_) - a1 * k11 - s * a2 * k12;
      double f2 = y2 * (e2 - bias_) - s * a1 * k12 - a2 * k22;
      double l1 = a1 + s * (a2 - lo);
      double h1 = a1 + s * (a2 - hi);
      double lo_obj = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 +
                      s * lo * l1 * k12;
      double hi_obj = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 +
                      s * hi * h1 * k12;
      if (lo_obj < hi_obj - 1e-12) {
        a2_new = lo;
      } else if (lo_obj > hi_obj + 1e-12) {
        a2_new = hi;
      } else {
        return false;
      }
    }
    if (std::abs(a2_new - a2) < 1e-12 * (a2_new + a2 + 1e-12)) return false;

    double a1_new = a1 + s * (a2 - a2_new);
    if (a1_new < 0.0) a1_new = 0.0;
    if (a1_new > c1) a1_new = c1;

    double d1 = y1 * (a1_new - a1), d2 = y2 * (a2_new - a2);
    double b1 = bias_ - e1 - d1 * k11 - d2 * k12;
    double b2 = bias_ - e2 - d1 * k12 - d2 * k22;
    double b_new;
    if (a1_new > 1e-12 && a1_new < c1 - 1e-12) {
      b_new = b1;
    } else if (a2_new > 1e-12 && a2_new < c2 - 1e-12) {
      b_new = b2;
    } else {
      b_new = 0.5 * (b1 + b2);
    }

    double db = b_new - bias_;
    for (int i = 0; i < n_; ++i)
      errors_[static_cast<size_t>(i)] += d1 * k1(i) + d2 * k2(i) + db;
    alphas_(i1) = a1_new;
    alphas_(i2) = a2_new;
    bias_ = b_new;
    return true;
  }

  const MatrixXd& x_;
  const std::vector<int>& y_;
  const std::vector<double>& box_;
  const SvmOptions& opts_;
  int n_;
  VectorXd alphas_;
  std::vector<double> errors_;  // E_i = f(x_i) - y_i
  double bias_ = 0.0;
  int sweep_start_ = 0;
  std::vector<std::unique_ptr<VectorXd>> rows_;
};

double decision_from(const MatrixXd& inputs, const std::vector<int>& y, const BinarySvm& svm,
                     const SvmOptions& opts, const VectorXd& c) {
  double acc = 0.0;
  for (int i : svm.support)
    acc += y[static_cast<size_t>(i)] * svm.alphas(i) *
           kernel_eval(opts.kernel, opts.gamma, inputs.row(i).transpose(), c);
  return acc + svm.bias;
}

}  // namespace

const char* category_name(PurposeCategory c) {
  int idx = static_cast<int>(c) - 1;
  if (idx < 0 || idx >= kNumCategories) throw Error("invalid purpose category");
  return kCategoryNames[idx];
}

std::optional<PurposeCategory> category_from_name(const std::string& name) {
  for (int i = 0; i < kNumCategories; ++i)
    if (name == kCategoryNames[i]) return static_cast<PurposeCategory>(i + 1);
  return std::nullopt;
}

double kernel_eval(Kernel kernel, double gamma, const VectorXd& a, const VectorXd& b) {
  switch (kernel) {
    case Kernel::Linear:
      return a.dot(b);
    case Kernel::Rbf:
      return std::exp(-gamma * (a - b).squaredNorm());
  }
  throw Error("unknown kernel");
}

BinarySvm train_binary_svm(const MatrixXd& x, const std::vector<int>& y,
                           const std::vector<double>& box, const SvmOptions& opts) {
  if (static_cast<size_t>(x.rows()) != y.size() || y.size() != box.size())
    throw Error("train_binary_svm: size mismatch");
  bool has_pos = false, has_neg = false;
  for (int v : y) (v > 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) throw Error("train_binary_svm: need both classes");
  SmoSolver solver(x, y, box, opts);
  return solver.solve();
}

OvrSvmModel train_ovr_svm(const std::vector<ContextSample>& samples, const SvmOptions& opts) {
  if (samples.size() < 2) throw Error("train_ovr_svm: need at least two samples");
  OvrSvmModel model;
  model.opts = opts;
  const int n = static_cast<int>(samples.size());
  const int q = static_cast<int>(samples.front().c.size());
  model.inputs.resize(n, q);
  model.labels.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (samples[static_cast<size_t>(i)].c.size() != q)
      throw Error("train_ovr_svm: inconsistent embedding dimension");
    model.inputs.row(i) = samples[static_cast<size_t>(i)].c.transpose();
    model.labels.push_back(samples[static_cast<size_t>(i)].label);
  }

  int distinct = 0;
  std::array<int, kNumCategories> counts{};
  for (PurposeCategory l : model.labels) counts[static_cast<size_t>(static_cast<int>(l) - 1)]++;
  for (int c : counts)
    if (c > 0) ++distinct;
  if (distinct < 2) throw Error("train_ovr_svm: a single class is present");

  for (int j = 0; j < kNumCategories; ++j) {
    BinarySvm& svm = model.per_class[static_cast<size_t>(j)];
    if (counts[static_cast<size_t>(j)] == 0) {
      // no positives: constant "not this class" machine
      svm.alphas = VectorXd::Zero(n);
      svm.bias = -1.0;
      svm.trained = false;
      continue;
    }
    std::vector<int> y(static_cast<size_t>(n));
    std::vector<double> box(static_cast<size_t>(n));
    double pos_r = opts.R * opts.class_r_scale[static_cast<size_t>(j)];
    for (int i = 0; i < n; ++i) {
      bool pos = static_cast<int>(model.labels[static_cast<size_t>(i)]) == j + 1;
      y[static_cast<size_t>(i)] = pos ? 1 : -1;
      box[static_cast<size_t>(i)] = pos ? pos_r : opts.R;
    }
    svm = train_binary_svm(model.inputs, y, box, opts);
  }
  return model;
}

double decision_value(const OvrSvmModel& model, PurposeCategory j, const VectorXd& c) {
  const BinarySvm& svm = model.per_class[static_cast<size_t>(static_cast<int>(j) - 1)];
  if (svm.alphas.size() == 0) return svm.bias;
  std::vector<int> y(model.labels.size());
  for (size_t i = 0; i < model.labels.size(); ++i)
    y[i] = static_cast<int>(model.labels[i]) == static_cast<int>(j) ? 1 : -1;
  return decision_from(model.inputs, y, svm, model.opts, c);
}

std::array<double, kNumCategories> decision_values(const OvrSvmModel& model, const VectorXd& c) {
  std::array<double, kNumCategories> out{};
  for (int j = 0; j < kNumCategories; ++j)
    out[static_cast<size_t>(j)] = decision_value(model, static_cast<PurposeCategory>(j + 1), c);
  return out;
}

PurposeCategory classify(const OvrSvmModel& model, const VectorXd& c) {
  std::array<double, kNumCategories> d = decision_values(model, c);
  int best = 0;
  for (int j = 1; j < kNumCategories; ++j)
    if (d[static_cast<size_t>(j)] > d[static_cast<size_t>(best)]) best = j;
  return static_cast<PurposeCategory>(best + 1);
}

BinaryCpModel train_binary_cp(const std::vector<ContextSample>& samples, const SvmOptions& opts) {
  BinaryCpModel model;
  model.opts = opts;
  const int n = static_cast<int>(samples.size());
  if (n < 2) throw Error("train_binary_cp: need at least two samples");
  const int q = static_cast<int>(samples.front().c.size());
  model.inputs.resize(n, q);
  model.y.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    model.inputs.row(i) = samples[static_cast<size_t>(i)].c.transpose();
    model.y.push_back(cp_flag(samples[static_cast<size_t>(i)].label) == 1 ? 1 : -1);
  }
  std::vector<double> box(static_cast<size_t>(n), opts.R);
  model.svm = train_binary_svm(model.inputs, model.y, box, opts);
  return model;
}

int binary_cp_flag(const BinaryCpModel& model, const VectorXd& c) {
  return decision_from(model.inputs, model.y, model.svm, model.opts, c) > 0.0 ? 1 : 0;
}

double svm_kkt_residual(const BinarySvm& svm, const MatrixXd& x, const std::vector<int>& y,
                        const std::vector<double>& box, const SvmOptions& opts) {
  double worst = 0.0;
  for (int i = 0; i < static_cast<int>(y.size()); ++i) {
    double f = decision_from(x, y, svm, opts, x.row(i).transpose());
    double margin = y[static_cast<size_t>(i)] * f;
    double a = svm.alphas(i);
    if (a < box[static_cast<size_t>(i)] - 1e-12) worst = std::max(worst, 1.0 - margin);
    if (a > 1e-12) worst = std::max(worst, margin - 1.0);
  }
  return worst;
}

void write_ovr_svm(BinWriter& w, const OvrSvmModel& model) {
  w.u32(static_cast<uint32_t>(model.opts.kernel));
  w.f64(model.opts.gamma);
  w.f64(model.opts.R);
  w.f64(model.opts.tol);
  w.matrix(model.inputs);
  w.u64(model.labels.size());
  for (PurposeCategory l : model.labels) w.u32(static_cast<uint32_t>(l));
  for (const BinarySvm& svm : model.per_class) {
    w.u32(svm.trained ? 1 : 0);
    w.vector(svm.alphas);
    w.f64(svm.bias);
    w.u64(svm.support.size());
    for (int i : svm.support) w.i64(i);
  }
}

OvrSvmModel read_ovr_svm(BinReader& r) {
  OvrSvmModel model;
  model.opts.kernel = static_cast<Kernel>(r.u32());
  model.opts.gamma = r.f64();
  model.opts.R = r.f64();
  model.opts.tol = r.f64();
  model.inputs = r.matrix();
  uint64_t n = r.u64();
  for (uint64_t i = 0; i < n; ++i)
    model.labels.push_back(static_cast<PurposeCategory>(r.u32()));
  for (BinarySvm& svm : model.per_class) {
    svm.trained = r.u32() != 0;
    svm.alphas = r.vector();
    svm.bias = r.f64();
    uint64_t ns = r.u64();
    for (uint64_t i = 0; i < ns; ++i) svm.support.push_back(static_cast<int>(r.i64()));
  }
  return model;
}

void save_purpose_model(const OvrSvmModel& model, const std::string& path) {
  BinWriter w(path);
  w.header(ModelKind::Purpose);
  write_ovr_svm(w, model);
}

OvrSvmModel load_purpose_model(const std::string& path) {
  BinReader r(path);
  r.header(ModelKind::Purpose);
  return read_ovr_svm(r);
}

}  // namespace glad
