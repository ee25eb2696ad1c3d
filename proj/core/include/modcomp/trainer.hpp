#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "modcomp/activation.hpp"
#include "modcomp/network.hpp"
#include "modcomp/synth_data.hpp"

namespace modcomp {

struct TrainConfig {
  double eta = 0.05;
  std::size_t T = 3000;
  std::size_t log_every = 10;
  std::size_t fresh_test_n = 5000;

  void validate() const;

  bool operator==(const TrainConfig&) const = default;
};

/// One logged point of a training run. Fields a run does not produce stay NaN
/// (probe errors of a uni-modal run, gamma/phi columns of the unused modality).
struct MetricRecord {
  std::size_t t = 0;
  double train_loss = 0.0;
  double train_error = 0.0;
  double test_error = std::numeric_limits<double>::quiet_NaN();
  double probe_error_1 = std::numeric_limits<double>::quiet_NaN();
  double probe_error_2 = std::numeric_limits<double>::quiet_NaN();
  Eigen::MatrixXd gamma;  ///< K x 2
  Eigen::MatrixXd phi;    ///< K x 2
};

/// Softmax with max subtraction.
Eigen::VectorXd class_probs(const Eigen::VectorXd& logits);

/// -log softmax(logits)[y].
double ce_loss(const Eigen::VectorXd& logits, int y);

/// Mean cross-entropy over the rows of an n x K logit matrix.
double mean_ce_loss(const Eigen::MatrixXd& logits, const std::vector<int>& y);

/// Fraction of rows whose label logit fails to beat every other logit
/// strictly (ties are errors). Throws std::invalid_argument on empty input.
double classification_error(const Eigen::MatrixXd& logits, const std::vector<int>& y);

/// Maps a dataset to its n x K logit matrix.
using Classifier = std::function<Eigen::MatrixXd(const Dataset&)>;

double classification_error(const Classifier& f, const Dataset& data);

struct ErrorEstimate {
  double error = 0.0;
  double standard_error = 0.0;  ///< binomial sqrt(e (1 - e) / n)
  std::size_t n = 0;
};

/// Classification error on n_fresh new draws from `model`.
ErrorEstimate test_error_estimate(const Classifier& f, const DataModel& model, std::size_t n_fresh,
                                  Rng& rng);

/// Gradient of the mean cross-entropy with respect to every neuron. A descent
/// step is W - eta * grad.
Weights grad_multi(const Weights& W, const Dataset& data, const ActParams& p);
UniWeights grad_uni(const UniWeights& V, const Eigen::MatrixXd& X, const std::vector<int>& y,
                    const ActParams& p);

/// Invoked at t = 0, every log_every iterations and at t = T with the record
/// already holding t, train_loss and train_error for the current weights.
using MultiHook = std::function<void(MetricRecord&, const Weights&)>;
using UniHook = std::function<void(MetricRecord&, const UniWeights&)>;
/// Invoked at every iteration t = 0..T with the weights before the update.
using StepObserver = std::function<void(std::size_t t, const Weights&)>;

template <class Net>
struct TrainResult {
  Net weights;
  std::vector<MetricRecord> records;
};

/// Loss above this value aborts training with a DivergenceError.
inline constexpr double kDivergenceLoss = 1e6;

/// Full-batch gradient descent for exactly tc.T steps.
TrainResult<Weights> train(Weights W, const Dataset& data, const TrainConfig& tc,
                           const ActParams& p, const MultiHook& hook = {},
                           const StepObserver& observer = {});
TrainResult<UniWeights> train(UniWeights V, const Eigen::MatrixXd& X, const std::vector<int>& y,
                              const TrainConfig& tc, const ActParams& p, const UniHook& hook = {});

}  // namespace modcomp
