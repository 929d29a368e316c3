#include "bhsim/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace bhsim::nn {

namespace {
constexpr double kLn2 = 0.69314718055994530942;
constexpr double kProbFloor = 1e-12;

Mat sigmoid(const Mat& z) { return (1.0 / (1.0 + (-z.array()).exp())).matrix(); }
}  // namespace

Mat glorot_init(int fan_in, int fan_out, rng::Stream& stream) {
  if (fan_in <= 0 || fan_out <= 0) throw InvalidInput("glorot fans must be positive");
  double limit = std::sqrt(6.0 / (fan_in + fan_out));
  Mat w(fan_in, fan_out);
  for (int r = 0; r < fan_in; ++r)
    for (int c = 0; c < fan_out; ++c) w(r, c) = stream.uniform(-limit, limit);
  return w;
}

void adam_step(std::vector<Param*>& params, const AdamConfig& cfg, long t) {
  if (t < 1) throw InvalidInput("Adam step index starts at 1");
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (Param* p : params) {
    p->m = cfg.beta1 * p->m + (1.0 - cfg.beta1) * p->grad;
    p->v = (cfg.beta2 * p->v.array() + (1.0 - cfg.beta2) * p->grad.array().square()).matrix();
    Eigen::ArrayXXd m_hat = p->m.array() / bc1;
    Eigen::ArrayXXd v_hat = p->v.array() / bc2;
    p->value.array() -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
  }
}

// ---------------------------------------------------------------------------
// LSTM

LstmLayer::LstmLayer(int input_size, int hidden_size, bool return_sequence, rng::Stream& stream)
    : input_(input_size), hidden_(hidden_size), return_sequence_(return_sequence) {
  // Glorot per gate block, biases zero.
  Mat wx(input_, 4 * hidden_), wh(hidden_, 4 * hidden_);
  for (int gate = 0; gate < 4; ++gate) {
    wx.middleCols(gate * hidden_, hidden_) = glorot_init(input_, hidden_, stream);
    wh.middleCols(gate * hidden_, hidden_) = glorot_init(hidden_, hidden_, stream);
  }
  wx_.init(wx);
  wh_.init(wh);
  b_.init(Mat::Zero(1, 4 * hidden_));
}

Seq LstmLayer::forward(const Seq& in, bool, rng::Stream&) {
  if (in.empty()) throw InvalidInput("empty sequence");
  if (in[0].cols() != input_) throw InvalidInput("LSTM input width mismatch");
  long batch = in[0].rows();
  cache_.clear();
  cache_.resize(in.size());
  Mat h = Mat::Zero(batch, hidden_);
  Mat c = Mat::Zero(batch, hidden_);
  Seq out;
  for (std::size_t t = 0; t < in.size(); ++t) {
    StepCache& cc = cache_[t];
    cc.x = in[t];
    cc.h_prev = h;
    cc.c_prev = c;
    Mat z = (in[t] * wx_.value + h * wh_.value).rowwise() + b_.value.row(0);
    cc.i = sigmoid(z.leftCols(hidden_));
    cc.f = sigmoid(z.middleCols(hidden_, hidden_));
    cc.g = z.middleCols(2 * hidden_, hidden_).array().tanh().matrix();
    cc.o = sigmoid(z.rightCols(hidden_));
    c = (cc.c_prev.array() * cc.f.array() + cc.g.array() * cc.i.array()).matrix();
    cc.c = c;
    cc.tanh_c = c.array().tanh().matrix();
    h = (cc.o.array() * cc.tanh_c.array()).matrix();
    if (return_sequence_) out.push_back(h);
  }
  if (!return_sequence_) out.push_back(h);
  return out;
}

Seq LstmLayer::backward(const Seq& grad_out) {
  std::size_t steps = cache_.size();
  long batch = cache_[0].x.rows();
  wx_.grad.setZero();
  wh_.grad.setZero();
  b_.grad.setZero();
  Seq grad_in(steps);
  Mat dh_next = Mat::Zero(batch, hidden_);
  Mat dc_next = Mat::Zero(batch, hidden_);
  for (std::size_t ti = steps; ti-- > 0;) {
    const StepCache& cc = cache_[ti];
    Mat dh = dh_next;
    if (return_sequence_) {
      dh += grad_out[ti];
    } else if (ti == steps - 1) {
      dh += grad_out[0];
    }
    Mat dd_o = (dh.array() * cc.tanh_c.array()).matrix();
    Mat dc = dc_next +
             (dh.array() * cc.o.array() * (1.0 - cc.tanh_c.array().square())).matrix();
    Mat dd_i = (dc.array() * cc.g.array()).matrix();
    Mat dd_f = (dc.array() * cc.c_prev.array()).matrix();
    Mat dd_g = (dc.array() * cc.i.array()).matrix();
    Mat dz(batch, 4 * hidden_);
    dz.leftCols(hidden_) = (dd_i.array() * cc.i.array() * (1.0 - cc.i.array())).matrix();
    dz.middleCols(hidden_, hidden_) =
        (dd_f.array() * cc.f.array() * (1.0 - cc.f.array())).matrix();
    dz.middleCols(2 * hidden_, hidden_) = (dd_g.array() * (1.0 - cc.g.array().square())).matrix();
    dz.rightCols(hidden_) = (dd_o.array() * cc.o.array() * (1.0 - cc.o.array())).matrix();
    wx_.grad += cc.x.transpose() * dz;
    wh_.grad += cc.h_prev.transpose() * dz;
    b_.grad += dz.colwise().sum();
    grad_in[ti] = dz * wx_.value.transpose();
    dh_next = dz * wh_.value.transpose();
    dc_next = (dc.array() * cc.f.array()).matrix();
  }
  return grad_in;
}

std::string LstmLayer::describe() const {
  return "lstm " + std::to_string(input_) + " " + std::to_string(hidden_) + " " +
         (return_sequence_ ? "seq" : "last");
}

// ---------------------------------------------------------------------------
// Dense (time-distributed)

DenseLayer::DenseLayer(int input_size, int output_size, Activation act, rng::Stream& stream)
    : input_(input_size), output_(output_size), act_(act) {
  w_.init(glorot_init(input_, output_, stream));
  b_.init(Mat::Zero(1, output_));
}

Seq DenseLayer::forward(const Seq& in, bool, rng::Stream&) {
  if (in[0].cols() != input_) throw InvalidInput("dense input width mismatch");
  in_cache_ = in;
  out_cache_.clear();
  Seq out;
  for (const Mat& x : in) {
    Mat y = (x * w_.value).rowwise() + b_.value.row(0);
    if (act_ == Activation::Relu) y = y.cwiseMax(0.0);
    out_cache_.push_back(y);
    out.push_back(y);
  }
  return out;
}

Seq DenseLayer::backward(const Seq& grad_out) {
  w_.grad.setZero();
  b_.grad.setZero();
  Seq grad_in(grad_out.size());
  for (std::size_t t = 0; t < grad_out.size(); ++t) {
    Mat dy = grad_out[t];
    if (act_ == Activation::Relu) {
      dy = (dy.array() * (out_cache_[t].array() > 0.0).cast<double>()).matrix();
    }
    w_.grad += in_cache_[t].transpose() * dy;
    b_.grad += dy.colwise().sum();
    grad_in[t] = dy * w_.value.transpose();
  }
  return grad_in;
}

std::string DenseLayer::describe() const {
  return "dense " + std::to_string(input_) + " " + std::to_string(output_) + " " +
         (act_ == Activation::Relu ? "relu" : "linear");
}

// ---------------------------------------------------------------------------
// Dropout

DropoutLayer::DropoutLayer(double rate) : rate_(rate) {
  if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout rate must be in [0,1)");
}

Seq DropoutLayer::forward(const Seq& in, bool training, rng::Stream& stream) {
  active_ = training && rate_ > 0.0;
  if (!active_) return in;
  double keep = 1.0 - rate_;
  masks_.clear();
  Seq out;
  for (const Mat& x : in) {
    Mat mask(x.rows(), x.cols());
    for (long r = 0; r < x.rows(); ++r)
      for (long c = 0; c < x.cols(); ++c)
        mask(r, c) = (stream.uniform() < rate_) ? 0.0 : 1.0 / keep;
    masks_.push_back(mask);
    out.push_back(x.cwiseProduct(mask));
  }
  return out;
}

Seq DropoutLayer::backward(const Seq& grad_out) {
  if (!active_) return grad_out;
  Seq grad_in(grad_out.size());
  for (std::size_t t = 0; t < grad_out.size(); ++t)
    grad_in[t] = grad_out[t].cwiseProduct(masks_[t]);
  return grad_in;
}

std::string DropoutLayer::describe() const { return "dropout " + std::to_string(rate_); }

// ---------------------------------------------------------------------------
// Model

Model::Model(const ModelConfig& cfg, std::uint64_t init_seed) : cfg_(cfg) {
  if (cfg.num_classes < 1) throw ConfigError("model needs at least one class");
  rng::Stream stream = rng::substream(init_seed, 0x1417ULL);
  layers_.push_back(std::make_unique<LstmLayer>(cfg.features_per_step, cfg.width, true, stream));
  for (int i = 0; i < cfg.dense_layers; ++i)
    layers_.push_back(std::make_unique<DenseLayer>(cfg.width, cfg.width, Activation::Relu, stream));
  layers_.push_back(std::make_unique<DropoutLayer>(cfg.dropout_rate));
  layers_.push_back(std::make_unique<LstmLayer>(cfg.width, cfg.width, false, stream));
  layers_.push_back(
      std::make_unique<DenseLayer>(cfg.width, cfg.num_classes, Activation::Linear, stream));
}

Seq Model::reshape(const Mat& flat) const {
  if (flat.cols() != static_cast<long>(cfg_.steps) * cfg_.features_per_step)
    throw InvalidInput("window width does not match model input shape");
  Seq seq;
  seq.reserve(cfg_.steps);
  for (int s = 0; s < cfg_.steps; ++s)
    seq.push_back(flat.middleCols(static_cast<long>(s) * cfg_.features_per_step,
                                  cfg_.features_per_step));
  return seq;
}

Mat Model::forward(const Mat& flat, bool training, rng::Stream& stream) {
  Seq seq = reshape(flat);
  for (auto& layer : layers_) seq = layer->forward(seq, training, stream);
  Mat logits = seq[0];
  // Row-wise stable softmax.
  Mat probs(logits.rows(), logits.cols());
  for (long r = 0; r < logits.rows(); ++r) {
    Eigen::RowVectorXd row = logits.row(r);
    double mx = row.maxCoeff();
    Eigen::ArrayXd e = (row.array() - mx).exp();
    probs.row(r) = (e / e.sum()).matrix().transpose();
  }
  return probs;
}

Mat Model::forward(const Mat& flat) {
  rng::Stream unused(0);
  return forward(flat, false, unused);
}

double Model::loss_bits(const Mat& probs, const std::vector<int>& labels) {
  if (probs.rows() != static_cast<long>(labels.size()))
    throw InvalidInput("labels/probabilities size mismatch");
  double total = 0.0;
  for (long r = 0; r < probs.rows(); ++r) {
    int y = labels[r];
    if (y < 0) continue;  // unseen validation beam: excluded from loss
    if (y >= probs.cols()) throw InvalidInput("label outside class vocabulary");
    total += -std::log2(std::max(probs(r, y), kProbFloor));
  }
  return total;
}

void Model::backward(const Mat& probs, const std::vector<int>& labels) {
  Mat dlogits = probs / kLn2;
  for (long r = 0; r < probs.rows(); ++r) {
    int y = labels[r];
    if (y < 0) {
      dlogits.row(r).setZero();
      continue;
    }
    dlogits(r, y) -= 1.0 / kLn2;
  }
  Seq grad{dlogits};
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) grad = (*it)->backward(grad);
}

void Model::apply_adam(const AdamConfig& cfg, long t) {
  auto p = params();
  adam_step(p, cfg, t);
}

std::vector<Param*> Model::params() {
  std::vector<Param*> out;
  for (auto& layer : layers_)
    for (Param* p : layer->params()) out.push_back(p);
  return out;
}

namespace {
struct EvalResult {
  double mean_loss_bits = 0.0;
  double accuracy = 0.0;
};

EvalResult evaluate(Model& model, const SupervisedFrame& frame, long begin, long end,
                    int batch_size) {
  EvalResult res;
  long loss_count = 0, hit = 0, total = 0;
  double loss_sum = 0.0;
  for (long r0 = begin; r0 < end; r0 += batch_size) {
    long n = std::min<long>(batch_size, end - r0);
    Mat probs = model.forward(frame.X.middleRows(r0, n));
    for (long i = 0; i < n; ++i) {
      int y = frame.labels[r0 + i];
      int pred = 0;
      probs.row(i).maxCoeff(&pred);
      // maxCoeff already returns the first (lowest) index on ties
      ++total;
      if (y >= 0) {
        loss_sum += -std::log2(std::max(probs(i, y), kProbFloor));
        ++loss_count;
        if (pred == y) ++hit;
      }
    }
  }
  if (loss_count > 0) res.mean_loss_bits = loss_sum / loss_count;
  if (total > 0) res.accuracy = static_cast<double>(hit) / total;
  return res;
}
}  // namespace

TrainHistory Model::train(const SupervisedFrame& frame, const TrainConfig& cfg) {
  if (frame.train_rows <= 0) throw InvalidInput("empty training split");
  if (frame.steps != cfg_.steps || frame.features_per_step != cfg_.features_per_step)
    throw InvalidInput("frame shape does not match model");
  rng::Stream dropout_stream = rng::substream(cfg.seed, 0xd70ULL);
  TrainHistory history;
  long t_star = frame.train_rows;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (long r0 = 0; r0 < t_star; r0 += cfg.batch_size) {
      long n = std::min<long>(cfg.batch_size, t_star - r0);
      Mat probs = forward(frame.X.middleRows(r0, n), true, dropout_stream);
      std::vector<int> labels(frame.labels.begin() + r0, frame.labels.begin() + r0 + n);
      backward(probs, labels);
      apply_adam(cfg.adam, ++adam_t_);
    }
    EvalResult tr = evaluate(*this, frame, 0, t_star, cfg.batch_size);
    EvalResult va = evaluate(*this, frame, t_star, frame.rows(), cfg.batch_size);
    history.train_loss_bits.push_back(tr.mean_loss_bits);
    history.train_accuracy.push_back(tr.accuracy);
    history.val_loss_bits.push_back(va.mean_loss_bits);
    history.val_accuracy.push_back(va.accuracy);
  }
  return history;
}

std::pair<int, double> Model::predict(const Eigen::RowVectorXd& window) {
  Mat probs = forward(window);
  int idx = 0;
  double p = probs.row(0).maxCoeff(&idx);
  return {idx, p};
}

void Model::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open model file for writing: " + path);
  out << "bhsim-model v1\n";
  out << cfg_.steps << ' ' << cfg_.features_per_step << ' ' << cfg_.num_classes << ' '
      << cfg_.width << ' ' << cfg_.dense_layers << ' ' << cfg_.dropout_rate << ' ' << cfg_.seed
      << '\n';
  out.precision(17);
  for (const auto& layer : layers_) {
    out << layer->describe() << '\n';
  }
  out << "params\n";
  Model& self = const_cast<Model&>(*this);
  for (Param* p : self.params()) {
    out << p->value.rows() << ' ' << p->value.cols() << '\n';
    for (long r = 0; r < p->value.rows(); ++r) {
      for (long c = 0; c < p->value.cols(); ++c) {
        if (c) out << ' ';
        out << p->value(r, c);
      }
      out << '\n';
    }
  }
  if (!out) throw IoError("failed writing model file: " + path);
}

Model Model::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  std::string line;
  std::getline(in, line);
  if (line != "bhsim-model v1") throw IoError("unrecognized model file: " + path);
  ModelConfig cfg;
  in >> cfg.steps >> cfg.features_per_step >> cfg.num_classes >> cfg.width >> cfg.dense_layers >>
      cfg.dropout_rate >> cfg.seed;
  std::getline(in, line);
  Model model(cfg, cfg.seed);
  while (std::getline(in, line) && line != "params") {
  }
  for (Param* p : model.params()) {
    long rows, cols;
    in >> rows >> cols;
    if (rows != p->value.rows() || cols != p->value.cols())
      throw IoError("model file shape mismatch in " + path);
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c) in >> p->value(r, c);
  }
  if (!in) throw IoError("truncated model file: " + path);
  return model;
}

TrainHistory Model::transfer(const SupervisedFrame& frame, const TrainConfig& cfg,
                             int transfer_epochs) {
  if (frame.steps != cfg_.steps || frame.features_per_step != cfg_.features_per_step ||
      frame.num_classes != cfg_.num_classes)
    throw InvalidInput("transfer requires matching architecture and class vocabulary");
  if (transfer_epochs < 0) throw InvalidInput("transfer epoch budget must be non-negative");
  for (Param* p : params()) p->reset_moments();
  adam_t_ = 0;
  TrainConfig reduced = cfg;
  reduced.epochs = transfer_epochs;
  return train(frame, reduced);
}

std::pair<GlobalBeamId, double> predict_next_beam(Model& model, const Eigen::RowVectorXd& window,
                                                  const std::vector<int>& class_to_beam) {
  auto [cls, p] = model.predict(window);
  if (cls < 0 || cls >= static_cast<int>(class_to_beam.size()))
    throw InvalidInput("predicted class outside beam vocabulary");
  return {GlobalBeamId{class_to_beam[cls]}, p};
}

GridPoint grid_search(const std::vector<GridPoint>& grid, const SupervisedFrame& frame,
                      const ModelConfig& base_model, const TrainConfig& train_cfg,
                      std::vector<TrainHistory>* histories) {
  if (grid.empty()) throw InvalidInput("hyperparameter grid is empty");
  int best = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(grid.size()); ++i) {
    ModelConfig cfg = base_model;
    cfg.dense_layers = grid[i].dense_layers;
    cfg.width = grid[i].width;
    Model model(cfg, cfg.seed);
    TrainHistory h = model.train(frame, train_cfg);
    double loss = h.val_loss_bits.empty() ? std::numeric_limits<double>::infinity()
                                          : h.val_loss_bits.back();
    if (histories) histories->push_back(std::move(h));
    if (loss < best_loss) {
      best_loss = loss;
      best = i;
    }
  }
  return grid[best];
}

}  // namespace bhsim::nn
