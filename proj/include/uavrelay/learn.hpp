#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uavrelay/pso.hpp"
#include "uavrelay/system.hpp"

namespace uavrelay {

/// Input length (2 N_t + 2 N_RFu + 2) K.
int feature_length(int users, int n_t, int n_rfu);

/// Max-abs scaled blocks: [Re h_k, Im h_k] per user, [Re b_k, Im b_k] per
/// user, precoder gains ||b_k||^2, inverse gains. `h2` is K x N_t.
Eigen::VectorXd build_features(const CMatrix& h2, const CMatrix& b_ut);

/// Features of a realization, taken at the nominal UAV position.
Eigen::VectorXd realization_features(const RealizationFactory& f);

enum class LossMode { MSE, MAE };

struct MlpModel {
  std::vector<int> sizes;  // L0, hidden..., K + 2
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  // Adam moments
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;
  long step = 0;

  int layers() const { return static_cast<int>(weights.size()); }
  int inputs() const { return sizes.front(); }
  int outputs() const { return sizes.back(); }
};

/// Uniform(+-1/sqrt(fan_in)) weights and zero biases.
MlpModel make_mlp(const std::vector<int>& sizes, std::uint64_t seed);

/// Columns of `x` are samples; returns outputs column-wise in (0, 1).
Eigen::MatrixXd forward(const MlpModel& m, const Eigen::MatrixXd& x);
Eigen::VectorXd forward(const MlpModel& m, const Eigen::VectorXd& x);

/// Power slots averaged over K * S, each location slot over S.
double loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& labels, LossMode mode);

struct Gradients {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;
  double loss = 0.0;  // data loss plus l2 penalty
};

/// Backpropagated gradient of loss + l2 * sum ||U||^2.
Gradients gradients(const MlpModel& m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, LossMode mode,
                    double l2);

double objective(const MlpModel& m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, LossMode mode, double l2);

/// Largest relative error between backprop and central differences over
/// `probes` random weight entries per layer, plus each layer's biases.
std::vector<double> gradient_check(const MlpModel& m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                   LossMode mode, double l2, int probes, std::uint64_t seed, double h = 1e-5);

struct Sample {
  std::uint64_t seed = 0;
  Eigen::VectorXd features;
  Eigen::VectorXd labels;  // normalized powers, then normalized (x, y)
};

struct Dataset {
  int users = 0;
  std::vector<Sample> samples;

  Eigen::MatrixXd feature_matrix(std::size_t from, std::size_t to) const;
  Eigen::MatrixXd label_matrix(std::size_t from, std::size_t to) const;
  /// First index of the validation tail under a fixed split.
  std::size_t split_index(double train_fraction = 0.8) const;
};

struct TrainConfig {
  int epochs = 15;
  int batch_size = 32;
  double lr = 1e-3;
  double l2 = 1e-4;
  LossMode loss = LossMode::MSE;
  double train_fraction = 0.8;
  std::uint64_t seed = 1;
};

struct TrainReport {
  std::vector<double> train_loss;  // selected loss on the training part
  std::vector<double> val_mse;
  std::vector<double> val_mae;
};

TrainReport train(MlpModel& m, const Dataset& data, const TrainConfig& cfg);

/// Labels of a joint solution: powers over their max, location over the box.
Eigen::VectorXd make_labels(const LocSolution& sol, const DeploymentBox& box);

struct Decision {
  Point2D location;
  PowerAlloc alloc;
  RateReport rates;
};

/// Maps network outputs back to a location in `box` and powers scaled onto
/// the budget with `b_ut`.
std::pair<PowerAlloc, Point2D> predict_and_denormalize(const Eigen::VectorXd& outputs, const CMatrix& b_ut,
                                                       double p_t_mw, const DeploymentBox& box);

/// Predicts, then rebuilds the stages at the predicted location and scores it.
Decision predict_decision(const MlpModel& m, const RealizationFactory& f);

struct DatasetOptions {
  int workers = 1;
  std::size_t chunk = 256;  // records flushed per chunk
};

/// Realization i uses seed derive_seed(seed, {i}). With `path` set, records
/// are appended as JSON lines and an existing file is resumed.
Dataset generate_dataset(std::size_t n, const Scenario& s, const PsoConfig& pso, std::uint64_t seed,
                         const std::string& path = {}, DatasetOptions opts = {});

Sample make_sample(const Scenario& s, const PsoConfig& pso, std::uint64_t realization_seed);

Dataset load_dataset(const std::string& path);

std::string model_to_json(const MlpModel& m);
MlpModel model_from_json(const std::string& text);

}  // namespace uavrelay
