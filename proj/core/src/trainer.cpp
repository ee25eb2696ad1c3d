#include "modcomp/trainer.hpp"

#include <cmath>
#include <stdexcept>

#include "batch_ops.hpp"
#include "modcomp/errors.hpp"

namespace modcomp {
namespace {

/// Activation derivatives of one encoder plus its contribution to the logits.
struct EncoderPass {
  Eigen::MatrixXd deriv;   ///< n x (K*m), sigma'(<w, x>)
  Eigen::MatrixXd logits;  ///< n x K
};

EncoderPass encode(const Eigen::MatrixXd& weights, int K, int m, const Eigen::MatrixXd& X,
                   const ActParams& p) {
  if (X.cols() != weights.cols()) throw ShapeError("trainer: input dimension mismatch");
  EncoderPass out;
  out.deriv.noalias() = X * weights.transpose();
  out.logits = batch::activate_and_pool(out.deriv, K, m, p, true);
  return out;
}

/// (softmax(logits) - onehot(y)) / n, the derivative of the mean loss.
Eigen::MatrixXd loss_residual(const Eigen::MatrixXd& logits, const std::vector<int>& y) {
  const auto n = logits.rows();
  Eigen::MatrixXd r = batch::softmax(logits);
  for (Eigen::Index i = 0; i < n; ++i) r(i, y[static_cast<std::size_t>(i)]) -= 1.0;
  return r / static_cast<double>(n);
}

/// Consumes the pass: its derivative block becomes the backpropagated signal.
Eigen::MatrixXd encoder_grad(EncoderPass& pass, const Eigen::MatrixXd& residual, int K, int m,
                             const Eigen::MatrixXd& X) {
  Eigen::MatrixXd& g = pass.deriv;
  for (int j = 0; j < K; ++j) {
    for (int l = 0; l < m; ++l) g.col(j * m + l).array() *= residual.col(j).array();
  }
  Eigen::MatrixXd grad;
  grad.noalias() = g.transpose() * X;
  return grad;
}

void check_labels(const Eigen::MatrixXd& logits, const std::vector<int>& y) {
  if (static_cast<std::size_t>(logits.rows()) != y.size()) {
    throw ShapeError("labels and logits disagree on the number of samples");
  }
  for (int label : y) {
    if (label < 0 || label >= logits.cols()) throw std::out_of_range("label outside [0, K)");
  }
}

void check_finite_loss(double loss, std::size_t t) {
  if (!std::isfinite(loss)) throw DivergenceError(t, "training loss became non-finite");
  if (loss > kDivergenceLoss) throw DivergenceError(t, "training loss exceeded 1e6");
}

bool should_log(std::size_t t, const TrainConfig& tc) {
  return t % tc.log_every == 0 || t == tc.T;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("train: eta must be finite and >= 0");
  if (T < 1) throw ConfigError("train: T must be at least 1");
  if (log_every < 1) throw ConfigError("train: log_every must be at least 1");
  if (fresh_test_n < 1) throw ConfigError("train: fresh_test_n must be at least 1");
}

Eigen::VectorXd class_probs(const Eigen::VectorXd& logits) {
  const double top = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - top).exp().matrix();
  return e / e.sum();
}

double ce_loss(const Eigen::VectorXd& logits, int y) {
  if (y < 0 || y >= logits.size()) throw std::out_of_range("ce_loss: label outside [0, K)");
  const double top = logits.maxCoeff();
  const double lse = top + std::log((logits.array() - top).exp().sum());
  return lse - logits(y);
}

double mean_ce_loss(const Eigen::MatrixXd& logits, const std::vector<int>& y) {
  check_labels(logits, y);
  const Eigen::VectorXd lse = batch::log_sum_exp(logits);
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    total += lse(i) - logits(i, y[static_cast<std::size_t>(i)]);
  }
  return total / static_cast<double>(logits.rows());
}

double classification_error(const Eigen::MatrixXd& logits, const std::vector<int>& y) {
  if (y.empty()) throw std::invalid_argument("classification_error: empty dataset");
  check_labels(logits, y);
  std::size_t wrong = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const int label = y[static_cast<std::size_t>(i)];
    const double fy = logits(i, label);
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      if (j != label && fy <= logits(i, j)) {
        ++wrong;
        break;
      }
    }
  }
  return static_cast<double>(wrong) / static_cast<double>(y.size());
}

double classification_error(const Classifier& f, const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("classification_error: empty dataset");
  return classification_error(f(data), data.y);
}

ErrorEstimate test_error_estimate(const Classifier& f, const DataModel& model, std::size_t n_fresh,
                                  Rng& rng) {
  if (n_fresh < 1) throw ConfigError("test_error_estimate: n_fresh must be at least 1");
  const Dataset fresh = sample_dataset(model, n_fresh, rng);
  ErrorEstimate est;
  est.n = n_fresh;
  est.error = classification_error(f, fresh);
  est.standard_error = std::sqrt(est.error * (1.0 - est.error) / static_cast<double>(n_fresh));
  return est;
}

Weights grad_multi(const Weights& W, const Dataset& data, const ActParams& p) {
  if (data.size() == 0) throw std::invalid_argument("grad_multi: empty dataset");
  std::array<EncoderPass, kNumModalities> pass{encode(W.w[0], W.K, W.m, data.x[0], p),
                                               encode(W.w[1], W.K, W.m, data.x[1], p)};
  const Eigen::MatrixXd logits = pass[0].logits + pass[1].logits;
  check_labels(logits, data.y);
  const Eigen::MatrixXd residual = loss_residual(logits, data.y);
  Weights g{W.K, W.m, {}};
  for (int r = 0; r < kNumModalities; ++r) {
    g.w[r] = encoder_grad(pass[r], residual, W.K, W.m, data.x[r]);
  }
  return g;
}

UniWeights grad_uni(const UniWeights& V, const Eigen::MatrixXd& X, const std::vector<int>& y,
                    const ActParams& p) {
  if (y.empty()) throw std::invalid_argument("grad_uni: empty dataset");
  EncoderPass pass = encode(V.v, V.K, V.m, X, p);
  check_labels(pass.logits, y);
  const Eigen::MatrixXd residual = loss_residual(pass.logits, y);
  return UniWeights{V.K, V.m, encoder_grad(pass, residual, V.K, V.m, X)};
}

TrainResult<Weights> train(Weights W, const Dataset& data, const TrainConfig& tc,
                           const ActParams& p, const MultiHook& hook,
                           const StepObserver& observer) {
  tc.validate();
  p.validate();
  if (data.size() == 0) throw std::invalid_argument("train: empty dataset");
  TrainResult<Weights> result;
  for (std::size_t t = 0;; ++t) {
    std::array<EncoderPass, kNumModalities> pass{encode(W.w[0], W.K, W.m, data.x[0], p),
                                                 encode(W.w[1], W.K, W.m, data.x[1], p)};
    const Eigen::MatrixXd logits = pass[0].logits + pass[1].logits;
    const double loss = mean_ce_loss(logits, data.y);
    check_finite_loss(loss, t);
    if (observer) observer(t, W);
    if (should_log(t, tc)) {
      MetricRecord rec;
      rec.t = t;
      rec.train_loss = loss;
      rec.train_error = classification_error(logits, data.y);
      if (hook) hook(rec, W);
      result.records.push_back(std::move(rec));
    }
    if (t == tc.T) break;
    const Eigen::MatrixXd residual = loss_residual(logits, data.y);
    for (int r = 0; r < kNumModalities; ++r) {
      W.w[r] -= tc.eta * encoder_grad(pass[r], residual, W.K, W.m, data.x[r]);
    }
  }
  result.weights = std::move(W);
  return result;
}

TrainResult<UniWeights> train(UniWeights V, const Eigen::MatrixXd& X, const std::vector<int>& y,
                              const TrainConfig& tc, const ActParams& p, const UniHook& hook) {
  tc.validate();
  p.validate();
  if (y.empty()) throw std::invalid_argument("train: empty dataset");
  TrainResult<UniWeights> result;
  for (std::size_t t = 0;; ++t) {
    EncoderPass pass = encode(V.v, V.K, V.m, X, p);
    const double loss = mean_ce_loss(pass.logits, y);
    check_finite_loss(loss, t);
    if (should_log(t, tc)) {
      MetricRecord rec;
      rec.t = t;
      rec.train_loss = loss;
      rec.train_error = classification_error(pass.logits, y);
      if (hook) hook(rec, V);
      result.records.push_back(std::move(rec));
    }
    if (t == tc.T) break;
    const Eigen::MatrixXd residual = loss_residual(pass.logits, y);
    V.v -= tc.eta * encoder_grad(pass, residual, V.K, V.m, X);
  }
  result.weights = std::move(V);
  return result;
}

}  // namespace modcomp
