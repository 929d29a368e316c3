#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bhsim/errors.hpp"
#include "bhsim/pipeline.hpp"
#include "bhsim/rng.hpp"

namespace bhsim::nn {

using Mat = Eigen::MatrixXd;
using Seq = std::vector<Mat>;  // one (batch x features) matrix per time step

// Glorot-uniform weight matrix, biases are initialized to zero elsewhere.
Mat glorot_init(int fan_in, int fan_out, rng::Stream& stream);

struct Param {
  Mat value;
  Mat grad;
  Mat m;  // Adam first moment
  Mat v;  // Adam second moment

  void init(const Mat& w) {
    value = w;
    grad = Mat::Zero(w.rows(), w.cols());
    m = Mat::Zero(w.rows(), w.cols());
    v = Mat::Zero(w.rows(), w.cols());
  }
  void reset_moments() {
    m.setZero();
    v.setZero();
  }
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam update applied in place; `t` counts optimizer steps
// starting at 1.
void adam_step(std::vector<Param*>& params, const AdamConfig& cfg, long t);

class Layer {
 public:
  virtual ~Layer() = default;
  virtual Seq forward(const Seq& in, bool training, rng::Stream& stream) = 0;
  virtual Seq backward(const Seq& grad_out) = 0;
  virtual std::vector<Param*> params() = 0;
  virtual std::string describe() const = 0;
};

// Standard gated recurrence: sigmoid input/forget/output gates, tanh cell
// candidate, c_t = c_{t-1} .* f_t + c~_t .* i_t. Optionally emits only the
// final hidden state.
class LstmLayer : public Layer {
 public:
  LstmLayer(int input_size, int hidden_size, bool return_sequence, rng::Stream& stream);

  Seq forward(const Seq& in, bool training, rng::Stream& stream) override;
  Seq backward(const Seq& grad_out) override;
  std::vector<Param*> params() override { return {&wx_, &wh_, &b_}; }
  std::string describe() const override;

  int hidden_size() const { return hidden_; }

 private:
  int input_ = 0;
  int hidden_ = 0;
  bool return_sequence_ = true;
  Param wx_;  // input x 4H, gate order [i | f | g | o]
  Param wh_;  // H x 4H
  Param b_;   // 1 x 4H
  struct StepCache {
    Mat x, h_prev, c_prev, i, f, g, o, c, tanh_c;
  };
  std::vector<StepCache> cache_;
};

enum class Activation { Relu, Linear };

// Dense layer applied independently at every time step.
class DenseLayer : public Layer {
 public:
  DenseLayer(int input_size, int output_size, Activation act, rng::Stream& stream);

  Seq forward(const Seq& in, bool training, rng::Stream& stream) override;
  Seq backward(const Seq& grad_out) override;
  std::vector<Param*> params() override { return {&w_, &b_}; }
  std::string describe() const override;

 private:
  int input_ = 0;
  int output_ = 0;
  Activation act_;
  Param w_;
  Param b_;
  Seq in_cache_, out_cache_;
};

// Inverted dropout: scales kept units at training time so inference is the
// identity map.
class DropoutLayer : public Layer {
 public:
  explicit DropoutLayer(double rate);

  Seq forward(const Seq& in, bool training, rng::Stream& stream) override;
  Seq backward(const Seq& grad_out) override;
  std::vector<Param*> params() override { return {}; }
  std::string describe() const override;

  double rate() const { return rate_; }

 private:
  double rate_;
  bool active_ = false;
  Seq masks_;
};

struct ModelConfig {
  int steps = 1;
  int features_per_step = 1;
  int num_classes = 2;
  int width = 16;
  int dense_layers = 6;  // hidden depth 8 total: LSTM + 6 dense + LSTM
  double dropout_rate = 0.2;
  std::uint64_t seed = 0;
};

struct TrainConfig {
  int epochs = 192;
  int batch_size = 64;
  AdamConfig adam;
  std::uint64_t seed = 0;
};

struct TrainHistory {
  std::vector<double> train_loss_bits;  // per-sample mean
  std::vector<double> train_accuracy;
  std::vector<double> val_loss_bits;
  std::vector<double> val_accuracy;

  double final_val_accuracy() const {
    return val_accuracy.empty() ? 0.0 : val_accuracy.back();
  }
};

// Fixed architecture per configuration: LSTM(width) -> dense(width, relu) x
// dense_layers -> dropout -> LSTM(width) -> dense(classes) + softmax.
class Model {
 public:
  Model(const ModelConfig& cfg, std::uint64_t init_seed);

  const ModelConfig& config() const { return cfg_; }

  // Rows of `flat` are windows laid out steps-major as in SupervisedFrame.
  // Returns batch x classes probabilities.
  Mat forward(const Mat& flat, bool training, rng::Stream& stream);
  Mat forward(const Mat& flat);  // inference

  // Summed categorical cross-entropy in bits with probability floor 1e-12.
  static double loss_bits(const Mat& probs, const std::vector<int>& labels);

  // Backpropagates the summed loss through softmax and every layer; gradients
  // accumulate into the layer parameters (zeroed here first).
  void backward(const Mat& probs, const std::vector<int>& labels);

  void apply_adam(const AdamConfig& cfg, long t);

  std::vector<Param*> params();

  // Deterministic full training loop over a supervised frame: contiguous
  // time-ordered batches, no shuffling, per-epoch clean evaluation passes.
  TrainHistory train(const SupervisedFrame& frame, const TrainConfig& cfg);

  // argmax class of one window; ties go to the lowest class index.
  std::pair<int, double> predict(const Eigen::RowVectorXd& window);

  void save(const std::string& path) const;
  static Model load(const std::string& path);

  // Warm start: same architecture, fresh Adam moments, reduced epoch budget.
  TrainHistory transfer(const SupervisedFrame& frame, const TrainConfig& cfg, int transfer_epochs);

 private:
  Seq reshape(const Mat& flat) const;
  ModelConfig cfg_;
  std::vector<std::unique_ptr<Layer>> layers_;
  long adam_t_ = 0;
};

// argmax(probabilities) mapped through class_to_beam.
std::pair<GlobalBeamId, double> predict_next_beam(Model& model,
                                                  const Eigen::RowVectorXd& window,
                                                  const std::vector<int>& class_to_beam);

struct GridPoint {
  int dense_layers;
  int width;
};

// Exhaustive sweep; returns the point with minimum final validation loss,
// ties broken by grid order.
GridPoint grid_search(const std::vector<GridPoint>& grid, const SupervisedFrame& frame,
                      const ModelConfig& base_model, const TrainConfig& train_cfg,
                      std::vector<TrainHistory>* histories = nullptr);

}  // namespace bhsim::nn
