// Copyright 2026 The t2d Authors
// SPDX-License-Identifier: Apache-2.0

#include "t2d/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "t2d/errors.hpp"
#include "t2d/sha256.hpp"

namespace t2d {

namespace {

template <typename Scalar>
Matrix<Scalar> kaiming_uniform(int rows, int cols, int fan_in, RngStream rng) {
  const double bound = std::sqrt(6.0 / fan_in);
  Matrix<Scalar> w(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r)
      w(r, c) = static_cast<Scalar>(rng.uniform_real(-bound, bound));
  return w;
}

template <typename Scalar>
class DenseLayer final : public Layer<Scalar> {
 public:
  DenseLayer(std::string name, int in_dim, int out_dim, RngStream rng)
      : name_(std::move(name)),
        w_(kaiming_uniform<Scalar>(out_dim, in_dim, in_dim, rng)),
        b_(Matrix<Scalar>::Zero(out_dim, 1)),
        gw_(Matrix<Scalar>::Zero(out_dim, in_dim)),
        gb_(Matrix<Scalar>::Zero(out_dim, 1)) {}

  const Matrix<Scalar>& forward(const Matrix<Scalar>& x) override {
    if (x.rows() != w_.cols()) throw BadInput("dense input width mismatch");
    x_ = &x;
    out_.noalias() = w_ * x;
    out_.colwise() += b_.col(0);
    return out_;
  }

  const Matrix<Scalar>& backward(const Matrix<Scalar>& dy) override {
    gw_.noalias() = dy * x_->transpose();
    gb_ = dy.rowwise().sum();
    dx_.noalias() = w_.transpose() * dy;
    return dx_;
  }

  void collect_params(std::vector<ParamRef<Scalar>>& out) override {
    out.push_back({name_ + ".weight", &w_, &gw_});
    out.push_back({name_ + ".bias", &b_, &gb_});
  }

 private:
  std::string name_;
  Matrix<Scalar> w_, b_, gw_, gb_, out_, dx_;
  const Matrix<Scalar>* x_ = nullptr;
};

template <typename Scalar>
class ReluLayer final : public Layer<Scalar> {
 public:
  const Matrix<Scalar>& forward(const Matrix<Scalar>& x) override {
    out_ = x.cwiseMax(Scalar(0));
    return out_;
  }
  const Matrix<Scalar>& backward(const Matrix<Scalar>& dy) override {
    dx_.resize(dy.rows(), dy.cols());
    dx_.array() =
        (out_.array() > Scalar(0)).template cast<Scalar>() * dy.array();
    return dx_;
  }

 private:
  Matrix<Scalar> out_, dx_;
};

// 3x3 convolution, stride 1, zero padding 1. Activations between the
// convolutional blocks are pixel-major: a (n*H*W x C) matrix whose
// column c holds the channel-c planes of the whole batch, so the conv
// output is the GEMM result itself, with no reshape pass. The network
// input is channel-planar per sample (input_dim x n); planar_input
// selects that addressing for the im2col gather. ReLU can be fused
// into the bias pass.
template <typename Scalar>
class Conv3x3Layer final : public Layer<Scalar> {
 public:
  Conv3x3Layer(std::string name, int in_ch, int out_ch, int h, int w,
               bool planar_input, bool fuse_relu, RngStream rng)
      : name_(std::move(name)),
        in_ch_(in_ch),
        out_ch_(out_ch),
        h_(h),
        w_(w),
        planar_input_(planar_input),
        fuse_relu_(fuse_relu),
        weight_(kaiming_uniform<Scalar>(out_ch, in_ch * 9, in_ch * 9, rng)),
        bias_(Matrix<Scalar>::Zero(out_ch, 1)),
        gweight_(Matrix<Scalar>::Zero(out_ch, in_ch * 9)),
        gbias_(Matrix<Scalar>::Zero(out_ch, 1)) {}

  const Matrix<Scalar>& forward(const Matrix<Scalar>& x) override {
    const int hw = h_ * w_;
    if (planar_input_) {
      if (x.rows() != static_cast<Eigen::Index>(in_ch_) * hw)
        throw BadInput("conv input shape mismatch");
      n_ = static_cast<int>(x.cols());
    } else {
      if (x.cols() != in_ch_ || x.rows() % hw != 0)
        throw BadInput("conv input shape mismatch");
      n_ = static_cast<int>(x.rows() / hw);
    }
    im2col(x);
    out_.noalias() = cols_ * weight_.transpose();  // (n*H*W x out_ch)
    for (int c = 0; c < out_ch_; ++c) {
      auto col = out_.col(c).array();
      if (fuse_relu_) {
        col = (col + bias_(c, 0)).max(Scalar(0));
      } else {
        col += bias_(c, 0);
      }
    }
    return out_;
  }

  const Matrix<Scalar>& backward(const Matrix<Scalar>& dy) override {
    const Matrix<Scalar>* grad = &dy;
    if (fuse_relu_) {
      dmask_.resize(dy.rows(), dy.cols());
      dmask_.array() =
          (out_.array() > Scalar(0)).template cast<Scalar>() * dy.array();
      grad = &dmask_;
    }
    gweight_.noalias() = grad->transpose() * cols_;
    gbias_ = grad->colwise().sum().transpose();
    if (!needs_input_grad_) {
      dx_.resize(0, 0);
      return dx_;
    }
    dcols_.noalias() = *grad * weight_;
    col2im();
    return dx_;
  }

  void collect_params(std::vector<ParamRef<Scalar>>& out) override {
    out.push_back({name_ + ".weight", &weight_, &gweight_});
    out.push_back({name_ + ".bias", &bias_, &gbias_});
  }

  void set_needs_input_grad(bool v) override { needs_input_grad_ = v; }

 private:
  const Scalar* in_plane(const Matrix<Scalar>& x, int ci, int s) const {
    const int hw = h_ * w_;
    return planar_input_
               ? x.col(s).data() + static_cast<std::size_t>(ci) * hw
               : x.col(ci).data() + static_cast<std::size_t>(s) * hw;
  }

  void im2col(const Matrix<Scalar>& x) {
    const int hw = h_ * w_;
    const Eigen::Index rows = static_cast<Eigen::Index>(n_) * hw;
    if (cols_.rows() != rows) {
      // Padding zeros sit at fixed positions; write them only when the
      // buffer shape changes.
      cols_.resize(rows, static_cast<Eigen::Index>(in_ch_) * 9);
      cols_.setZero();
    }
    for (int ci = 0; ci < in_ch_; ++ci) {
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const int col = ci * 9 + ky * 3 + kx;
          Scalar* dst = cols_.col(col).data();
          const int dy = ky - 1, dx = kx - 1;
          const int y0 = std::max(0, -dy), y1 = h_ - 1 - std::max(0, dy);
          const int x0 = std::max(0, -dx), x1 = w_ - 1 - std::max(0, dx);
          const int seg = x1 - x0 + 1;
          if (seg <= 0) continue;
          for (int s = 0; s < n_; ++s) {
            const Scalar* src = in_plane(x, ci, s);
            Scalar* out = dst + static_cast<std::size_t>(s) * hw;
            for (int y = y0; y <= y1; ++y) {
              std::memcpy(out + y * w_ + x0, src + (y + dy) * w_ + (x0 + dx),
                          sizeof(Scalar) * static_cast<std::size_t>(seg));
            }
          }
        }
      }
    }
  }

  // Scatter-add dcols_ back to the pixel-major input gradient.
  void col2im() {
    const int hw = h_ * w_;
    dx_.resize(static_cast<Eigen::Index>(n_) * hw, in_ch_);
    dx_.setZero();
    for (int ci = 0; ci < in_ch_; ++ci) {
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const int col = ci * 9 + ky * 3 + kx;
          const Scalar* src = dcols_.col(col).data();
          const int dy = ky - 1, dx = kx - 1;
          const int y0 = std::max(0, -dy), y1 = h_ - 1 - std::max(0, dy);
          const int x0 = std::max(0, -dx), x1 = w_ - 1 - std::max(0, dx);
          const int seg = x1 - x0 + 1;
          if (seg <= 0) continue;
          for (int s = 0; s < n_; ++s) {
            Scalar* out = dx_.col(ci).data() + static_cast<std::size_t>(s) * hw;
            const Scalar* in = src + static_cast<std::size_t>(s) * hw;
            for (int y = y0; y <= y1; ++y) {
              Scalar* o = out + (y + dy) * w_ + (x0 + dx);
              const Scalar* p = in + y * w_ + x0;
              for (int k = 0; k < seg; ++k) o[k] += p[k];
            }
          }
        }
      }
    }
  }

  std::string name_;
  int in_ch_, out_ch_, h_, w_;
  bool planar_input_, fuse_relu_;
  int n_ = 0;
  bool needs_input_grad_ = true;
  Matrix<Scalar> weight_, bias_, gweight_, gbias_;
  Matrix<Scalar> cols_, out_, dmask_, dcols_, dx_;
};

// 2x2 max pooling on pixel-major activations.
template <typename Scalar>
class MaxPool2Layer final : public Layer<Scalar> {
 public:
  MaxPool2Layer(int channels, int h, int w) : ch_(channels), h_(h), w_(w) {
    if (h % 2 != 0 || w % 2 != 0) throw BadParameter("pool needs even dims");
  }

  const Matrix<Scalar>& forward(const Matrix<Scalar>& x) override {
    const int hw = h_ * w_;
    const int oh = h_ / 2, ow = w_ / 2, ohw = oh * ow;
    if (x.cols() != ch_ || x.rows() % hw != 0)
      throw BadInput("pool input shape mismatch");
    n_ = static_cast<int>(x.rows() / hw);
    out_.resize(static_cast<Eigen::Index>(n_) * ohw, ch_);
    argmax_.resize(static_cast<std::size_t>(out_.size()));
    for (int c = 0; c < ch_; ++c) {
      int* am = argmax_.data() +
                static_cast<std::size_t>(c) * static_cast<std::size_t>(n_) * ohw;
      for (int s = 0; s < n_; ++s) {
        const Scalar* plane = x.col(c).data() + static_cast<std::size_t>(s) * hw;
        Scalar* dst = out_.col(c).data() + static_cast<std::size_t>(s) * ohw;
        std::size_t oidx = 0;
        for (int oy = 0; oy < oh; ++oy) {
          const Scalar* r0 = plane + (2 * oy) * w_;
          const Scalar* r1 = r0 + w_;
          for (int ox = 0; ox < ow; ++ox, ++oidx) {
            const int base = (2 * oy) * w_ + 2 * ox;
            const Scalar a = r0[2 * ox], b = r0[2 * ox + 1];
            const Scalar cc = r1[2 * ox], d = r1[2 * ox + 1];
            Scalar v = a;
            int best = base;
            if (b > v) { v = b; best = base + 1; }
            if (cc > v) { v = cc; best = base + w_; }
            if (d > v) { v = d; best = base + w_ + 1; }
            dst[oidx] = v;
            am[static_cast<std::size_t>(s) * ohw + oidx] = best;
          }
        }
      }
    }
    return out_;
  }

  const Matrix<Scalar>& backward(const Matrix<Scalar>& dy) override {
    const int hw = h_ * w_;
    const int ohw = hw / 4;
    dx_.resize(static_cast<Eigen::Index>(n_) * hw, ch_);
    dx_.setZero();
    for (int c = 0; c < ch_; ++c) {
      const int* am = argmax_.data() +
                      static_cast<std::size_t>(c) *
                          static_cast<std::size_t>(n_) * ohw;
      for (int s = 0; s < n_; ++s) {
        const Scalar* g = dy.col(c).data() + static_cast<std::size_t>(s) * ohw;
        Scalar* out = dx_.col(c).data() + static_cast<std::size_t>(s) * hw;
        const int* idx = am + static_cast<std::size_t>(s) * ohw;
        for (int i = 0; i < ohw; ++i) out[idx[i]] += g[i];
      }
    }
    return dx_;
  }

 private:
  int ch_, h_, w_;
  int n_ = 0;
  std::vector<int> argmax_;
  Matrix<Scalar> out_, dx_;
};

// Global average pooling: pixel-major (n*H*W x C) to per-sample columns
// (C x n).
template <typename Scalar>
class GlobalAvgPoolLayer final : public Layer<Scalar> {
 public:
  GlobalAvgPoolLayer(int channels, int h, int w) : ch_(channels), hw_(h * w) {}

  const Matrix<Scalar>& forward(const Matrix<Scalar>& x) override {
    if (x.cols() != ch_ || x.rows() % hw_ != 0)
      throw BadInput("gap input shape mismatch");
    n_ = static_cast<int>(x.rows() / hw_);
    out_.resize(ch_, n_);
    for (int c = 0; c < ch_; ++c) {
      const Scalar* col = x.col(c).data();
      for (int s = 0; s < n_; ++s) {
        Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> plane(
            col + static_cast<std::size_t>(s) * hw_, hw_);
        out_(c, s) = plane.sum() / static_cast<Scalar>(hw_);
      }
    }
    return out_;
  }

  const Matrix<Scalar>& backward(const Matrix<Scalar>& dy) override {
    dx_.resize(static_cast<Eigen::Index>(n_) * hw_, ch_);
    for (int c = 0; c < ch_; ++c) {
      Scalar* col = dx_.col(c).data();
      for (int s = 0; s < n_; ++s) {
        const Scalar g = dy(c, s) / static_cast<Scalar>(hw_);
        Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> plane(
            col + static_cast<std::size_t>(s) * hw_, hw_);
        plane.setConstant(g);
      }
    }
    return dx_;
  }

 private:
  int ch_, hw_;
  int n_ = 0;
  Matrix<Scalar> out_, dx_;
};

// Adam with bias correction; state kept per parameter tensor.
class Adam {
 public:
  Adam(std::vector<ParamRef<float>> params, const TrainConfig& cfg)
      : params_(std::move(params)), cfg_(cfg) {
    for (const auto& p : params_) {
      m_.emplace_back(Matrix<float>::Zero(p.value->rows(), p.value->cols()));
      v_.emplace_back(Matrix<float>::Zero(p.value->rows(), p.value->cols()));
    }
  }

  void step(double lr) {
    ++t_;
    const float b1 = static_cast<float>(cfg_.beta1);
    const float b2 = static_cast<float>(cfg_.beta2);
    const float corr1 = 1.0f - static_cast<float>(std::pow(cfg_.beta1, t_));
    const float corr2 = 1.0f - static_cast<float>(std::pow(cfg_.beta2, t_));
    const float eps = static_cast<float>(cfg_.eps);
    const float a = static_cast<float>(lr);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      const auto& g = params_[i].grad->array();
      m_[i].array() = b1 * m_[i].array() + (1.0f - b1) * g;
      v_[i].array() = b2 * v_[i].array() + (1.0f - b2) * g.square();
      params_[i].value->array() -=
          a * (m_[i].array() / corr1) / ((v_[i].array() / corr2).sqrt() + eps);
    }
  }

 private:
  std::vector<ParamRef<float>> params_;
  TrainConfig cfg_;
  std::vector<Matrix<float>> m_, v_;
  int t_ = 0;
};

template <typename Scalar>
double cross_entropy_impl(const Matrix<Scalar>& logits,
                          std::span<const int> labels,
                          Matrix<Scalar>* dlogits) {
  const int n = static_cast<int>(logits.cols());
  const int k = static_cast<int>(logits.rows());
  if (static_cast<std::size_t>(n) != labels.size())
    throw BadInput("logit/label count mismatch");
  if (dlogits) dlogits->resize(k, n);
  double total = 0.0;
  for (int s = 0; s < n; ++s) {
    const int y = labels[static_cast<std::size_t>(s)];
    if (y < 0 || y >= k) throw BadInput("label out of range");
    double mx = logits(0, s);
    for (int c = 1; c < k; ++c) mx = std::max(mx, double(logits(c, s)));
    double denom = 0.0;
    for (int c = 0; c < k; ++c) denom += std::exp(double(logits(c, s)) - mx);
    const double log_denom = std::log(denom) + mx;
    total += log_denom - double(logits(y, s));
    if (dlogits) {
      for (int c = 0; c < k; ++c) {
        const double p = std::exp(double(logits(c, s)) - log_denom);
        (*dlogits)(c, s) =
            static_cast<Scalar>((p - (c == y ? 1.0 : 0.0)) / n);
      }
    }
  }
  return total / n;
}

std::vector<int> shuffled_indices(std::size_t n, RngStream rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  rng.shuffle(idx);
  return idx;
}

Matrix<float> gather_cols(const Matrix<float>& x, std::span<const int> idx) {
  Matrix<float> out(x.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.col(static_cast<Eigen::Index>(i)) = x.col(idx[i]);
  return out;
}

double lr_at(const TrainConfig& cfg, int epoch) {
  if (cfg.schedule == LrSchedule::Constant || cfg.epochs <= 1) return cfg.lr;
  // Linear decay from lr to 0 over the run.
  return cfg.lr * (1.0 - static_cast<double>(epoch) / cfg.epochs);
}

struct DataMatrix {
  Matrix<float> x;
  std::vector<int> labels;
};

DataMatrix to_data(const DatasetArchive& a) {
  return {archive_to_matrix(a), archive_labels(a)};
}

Matrix<float> batched_logits(Network<float>& net, const Matrix<float>& x,
                             int batch = 512) {
  Matrix<float> out;
  for (Eigen::Index start = 0; start < x.cols(); start += batch) {
    const Eigen::Index len = std::min<Eigen::Index>(batch, x.cols() - start);
    const auto [reps, logits] = net.forward(x.middleCols(start, len));
    if (out.size() == 0) out.resize(logits.rows(), x.cols());
    out.middleCols(start, len) = logits;
  }
  return out;
}

Matrix<float> batched_reps(Network<float>& net, const Matrix<float>& x,
                           int batch = 512) {
  Matrix<float> out;
  for (Eigen::Index start = 0; start < x.cols(); start += batch) {
    const Eigen::Index len = std::min<Eigen::Index>(batch, x.cols() - start);
    const Matrix<float> reps = net.representations(x.middleCols(start, len));
    if (out.size() == 0) out.resize(reps.rows(), x.cols());
    out.middleCols(start, len) = reps;
  }
  return out;
}

void write_history_csv(const std::string& path,
                       const std::vector<EpochStats>& history) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw IoError("cannot create training log " + path);
  out << "epoch,train_loss,train_acc,val_acc\n";
  for (const auto& e : history)
    out << e.epoch << ',' << e.train_loss << ',' << e.train_acc << ','
        << e.val_acc << '\n';
}

}  // namespace

std::string ModelConfig::describe() const {
  if (arch == ArchKind::SmallCnn)
    return "smallcnn" + std::to_string(conv_channels);
  std::string s = "mlp";
  for (std::size_t i = 0; i < hidden.size(); ++i)
    s += (i ? "-" : "") + std::to_string(hidden[i]);
  return s;
}

template <typename Scalar>
Network<Scalar>::Network(const ModelConfig& cfg) : cfg_(cfg) {
  if (cfg.rep_dim < 1) throw BadParameter("rep_dim must be at least 1");
  if (cfg.class_count < 2) throw BadParameter("need at least two classes");
  RngStream root(cfg.init_seed, 0x696e6974ULL);  // "init"
  std::uint64_t tensor = 0;
  auto rng = [&] { return root.derive(tensor++); };

  if (cfg.arch == ArchKind::SmallCnn) {
    if (cfg.resolution % 4 != 0)
      throw BadParameter("SmallCnn needs a resolution divisible by 4");
    const int c1 = cfg.conv_channels;
    const int c2 = 2 * c1;
    const int r = cfg.resolution;
    auto conv1 = std::make_unique<Conv3x3Layer<Scalar>>(
        "conv1", cfg.in_channels, c1, r, r, /*planar_input=*/true,
        /*fuse_relu=*/true, rng());
    conv1->set_needs_input_grad(false);
    body_.push_back(std::move(conv1));
    body_.push_back(std::make_unique<MaxPool2Layer<Scalar>>(c1, r, r));
    body_.push_back(std::make_unique<Conv3x3Layer<Scalar>>(
        "conv2", c1, c2, r / 2, r / 2, /*planar_input=*/false,
        /*fuse_relu=*/true, rng()));
    body_.push_back(std::make_unique<MaxPool2Layer<Scalar>>(c2, r / 2, r / 2));
    body_.push_back(
        std::make_unique<GlobalAvgPoolLayer<Scalar>>(c2, r / 4, r / 4));
    body_.push_back(
        std::make_unique<DenseLayer<Scalar>>("rep", c2, cfg.rep_dim, rng()));
    body_.push_back(std::make_unique<ReluLayer<Scalar>>());
  } else {
    int in = cfg.input_dim();
    int li = 0;
    for (const int h : cfg.hidden) {
      body_.push_back(std::make_unique<DenseLayer<Scalar>>(
          "fc" + std::to_string(++li), in, h, rng()));
      body_.push_back(std::make_unique<ReluLayer<Scalar>>());
      in = h;
    }
    body_.push_back(
        std::make_unique<DenseLayer<Scalar>>("rep", in, cfg.rep_dim, rng()));
    body_.push_back(std::make_unique<ReluLayer<Scalar>>());
  }
  head_ = std::make_unique<DenseLayer<Scalar>>("head", cfg.rep_dim,
                                               cfg.class_count, rng());
}

template <typename Scalar>
Network<Scalar>::Network(const Network& other) : Network(other.cfg_) {
  // Parameter collection does not mutate the network.
  auto& source = const_cast<Network&>(other);
  auto mine = all_params();
  auto theirs = source.all_params();
  for (std::size_t i = 0; i < mine.size(); ++i) *mine[i].value = *theirs[i].value;
}

template <typename Scalar>
Matrix<Scalar> Network<Scalar>::representations(const Matrix<Scalar>& x) {
  if (x.rows() != cfg_.input_dim()) throw BadInput("input dimension mismatch");
  const Matrix<Scalar>* cur = &x;
  for (auto& layer : body_) cur = &layer->forward(*cur);
  return *cur;
}

template <typename Scalar>
std::pair<Matrix<Scalar>, Matrix<Scalar>> Network<Scalar>::forward(
    const Matrix<Scalar>& x) {
  if (x.rows() != cfg_.input_dim()) throw BadInput("input dimension mismatch");
  const Matrix<Scalar>* cur = &x;
  for (auto& layer : body_) cur = &layer->forward(*cur);
  return {*cur, head_->forward(*cur)};
}

template <typename Scalar>
void Network<Scalar>::backward(const Matrix<Scalar>& dlogits) {
  const Matrix<Scalar>* grad = &head_->backward(dlogits);
  for (auto it = body_.rbegin(); it != body_.rend(); ++it)
    grad = &(*it)->backward(*grad);
}

template <typename Scalar>
std::vector<ParamRef<Scalar>> Network<Scalar>::body_params() {
  std::vector<ParamRef<Scalar>> out;
  for (auto& layer : body_) layer->collect_params(out);
  return out;
}

template <typename Scalar>
std::vector<ParamRef<Scalar>> Network<Scalar>::head_params() {
  std::vector<ParamRef<Scalar>> out;
  head_->collect_params(out);
  return out;
}

template <typename Scalar>
std::vector<ParamRef<Scalar>> Network<Scalar>::all_params() {
  auto out = body_params();
  auto head = head_params();
  out.insert(out.end(), head.begin(), head.end());
  return out;
}

template <typename Scalar>
std::vector<Matrix<Scalar>> Network<Scalar>::snapshot_params() {
  std::vector<Matrix<Scalar>> snap;
  for (const auto& p : all_params()) snap.push_back(*p.value);
  return snap;
}

template <typename Scalar>
void Network<Scalar>::restore_params(const std::vector<Matrix<Scalar>>& snap) {
  auto params = all_params();
  if (snap.size() != params.size()) throw BadInput("snapshot size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) *params[i].value = snap[i];
}

template <typename Scalar>
std::string Network<Scalar>::body_digest() {
  Sha256 h;
  for (const auto& p : body_params())
    h.update(p.value->data(), sizeof(Scalar) * static_cast<std::size_t>(
                                                   p.value->size()));
  const auto d = h.digest();
  static const char* kHex = "0123456789abcdef";
  std::string s(64, '0');
  for (int i = 0; i < 32; ++i) {
    s[2 * i] = kHex[d[static_cast<std::size_t>(i)] >> 4];
    s[2 * i + 1] = kHex[d[static_cast<std::size_t>(i)] & 0xf];
  }
  return s;
}

template class Network<float>;
template class Network<double>;

Matrix<float> archive_to_matrix(const DatasetArchive& a) {
  const int hw = a.width * a.height;
  Matrix<float> x(static_cast<Eigen::Index>(a.channels) * hw,
                  static_cast<Eigen::Index>(a.size()));
  constexpr float kInv = 1.0f / 255.0f;
  for (std::size_t s = 0; s < a.size(); ++s) {
    const std::uint8_t* p = a.sample(s);
    float* col = x.col(static_cast<Eigen::Index>(s)).data();
    for (int i = 0; i < hw; ++i)
      for (int c = 0; c < a.channels; ++c)
        col[static_cast<std::size_t>(c) * hw + i] =
            kInv * p[static_cast<std::size_t>(i) * a.channels + c];
  }
  return x;
}

Matrix<float> images_to_matrix(std::span<const SceneImage> images) {
  if (images.empty()) return {};
  const Image& first = images[0];
  const int hw = first.width * first.height;
  Matrix<float> x(static_cast<Eigen::Index>(first.channels) * hw,
                  static_cast<Eigen::Index>(images.size()));
  constexpr float kInv = 1.0f / 255.0f;
  for (std::size_t s = 0; s < images.size(); ++s) {
    const Image& img = images[s];
    if (img.width != first.width || img.height != first.height ||
        img.channels != first.channels)
      throw BadInput("inconsistent image shapes in batch");
    float* col = x.col(static_cast<Eigen::Index>(s)).data();
    for (int i = 0; i < hw; ++i)
      for (int c = 0; c < img.channels; ++c)
        col[static_cast<std::size_t>(c) * hw + i] =
            kInv * img.data[static_cast<std::size_t>(i) * img.channels + c];
  }
  return x;
}

std::vector<int> archive_labels(const DatasetArchive& a) {
  std::vector<int> labels(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) labels[i] = a.labels[i];
  return labels;
}

double cross_entropy(const Matrix<float>& logits, std::span<const int> labels,
                     Matrix<float>* dlogits) {
  return cross_entropy_impl<float>(logits, labels, dlogits);
}

double accuracy(const Matrix<float>& logits, std::span<const int> labels) {
  if (labels.empty()) return 0.0;
  int hits = 0;
  for (Eigen::Index s = 0; s < logits.cols(); ++s) {
    Eigen::Index best = 0;
    logits.col(s).maxCoeff(&best);
    if (static_cast<int>(best) == labels[static_cast<std::size_t>(s)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

ModelState ModelState::init(const ModelConfig& cfg) {
  ModelState m;
  m.config = cfg;
  m.net = std::make_shared<Network<float>>(cfg);
  return m;
}

ModelState train(ModelState m, const DatasetArchive& train_data,
                 const DatasetArchive& val_data, const TrainConfig& cfg) {
  if (train_data.class_count > m.config.class_count)
    throw BadInput("dataset classes exceed model head width");
  const DataMatrix tr = to_data(train_data);
  const DataMatrix va = to_data(val_data);
  Network<float>& net = *m.net;

  Adam opt(net.all_params(), cfg);
  RngStream shuffle_root(cfg.shuffle_seed, 0x73687566ULL);  // "shuf"

  double best_val = -1.0;
  std::vector<Matrix<float>> best_snap;
  if (cfg.epochs > 0) best_snap = net.snapshot_params();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto idx = shuffled_indices(tr.labels.size(),
                                      shuffle_root.derive(
                                          static_cast<std::uint64_t>(epoch)));
    const double lr = lr_at(cfg, epoch);
    double loss_sum = 0.0;
    double acc_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < idx.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t len =
          std::min<std::size_t>(cfg.batch_size, idx.size() - start);
      std::vector<int> batch_idx(idx.begin() + static_cast<std::ptrdiff_t>(start),
                                 idx.begin() + static_cast<std::ptrdiff_t>(start + len));
      const Matrix<float> x = gather_cols(tr.x, batch_idx);
      std::vector<int> y(len);
      for (std::size_t i = 0; i < len; ++i)
        y[i] = tr.labels[static_cast<std::size_t>(batch_idx[i])];

      const auto [reps, logits] = net.forward(x);
      Matrix<float> dlogits;
      const double loss = cross_entropy(logits, y, &dlogits);
      if (!std::isfinite(loss))
        throw DivergenceError("non-finite loss at epoch " +
                              std::to_string(epoch));
      loss_sum += loss * static_cast<double>(len);
      acc_sum += accuracy(logits, y) * static_cast<double>(len);
      seen += len;
      net.backward(dlogits);
      opt.step(lr);
    }

    EpochStats stats;
    stats.epoch = m.epochs_seen + epoch;
    stats.train_loss = loss_sum / static_cast<double>(seen);
    stats.train_acc = acc_sum / static_cast<double>(seen);
    if (va.labels.empty()) {
      stats.val_acc = 0.0;
    } else {
      stats.val_acc = accuracy(batched_logits(net, va.x), va.labels);
    }
    m.history.push_back(stats);
    if (va.labels.empty() || stats.val_acc > best_val) {
      best_val = va.labels.empty() ? 0.0 : stats.val_acc;
      best_snap = net.snapshot_params();
    }
  }

  if (cfg.epochs > 0) {
    net.restore_params(best_snap);
    m.best_val_acc = std::max(best_val, 0.0);
  }
  m.epochs_seen += cfg.epochs;
  write_history_csv(cfg.log_csv, m.history);
  return m;
}

double evaluate_accuracy(const ModelState& m, const DatasetArchive& data) {
  const DataMatrix d = to_data(data);
  return accuracy(batched_logits(*m.net, d.x), d.labels);
}

ProbeResult train_linear_head(const Matrix<float>& train_reps,
                              std::span<const int> train_labels,
                              const Matrix<float>& val_reps,
                              std::span<const int> val_labels,
                              const Matrix<float>& test_reps,
                              std::span<const int> test_labels, int class_count,
                              const TrainConfig& cfg) {
  const int dim = static_cast<int>(train_reps.rows());
  // Zero start: the fresh affine probe has no symmetry to break.
  Matrix<float> w = Matrix<float>::Zero(class_count, dim);
  Matrix<float> b = Matrix<float>::Zero(class_count, 1);
  Matrix<float> gw = Matrix<float>::Zero(class_count, dim);
  Matrix<float> gb = Matrix<float>::Zero(class_count, 1);
  std::vector<ParamRef<float>> params = {{"w", &w, &gw}, {"b", &b, &gb}};
  Adam opt(params, cfg);
  RngStream shuffle_root(cfg.shuffle_seed, 0x70726f62ULL);  // "prob"

  auto eval = [&](const Matrix<float>& reps, std::span<const int> labels) {
    if (labels.empty()) return 0.0;
    Matrix<float> logits = w * reps;
    logits.colwise() += b.col(0);
    return accuracy(logits, labels);
  };

  double best_val = -1.0;
  Matrix<float> best_w = w, best_b = b;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto idx = shuffled_indices(train_labels.size(),
                                      shuffle_root.derive(
                                          static_cast<std::uint64_t>(epoch)));
    const double lr = lr_at(cfg, epoch);
    for (std::size_t start = 0; start < idx.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t len =
          std::min<std::size_t>(cfg.batch_size, idx.size() - start);
      std::vector<int> batch_idx(idx.begin() + static_cast<std::ptrdiff_t>(start),
                                 idx.begin() + static_cast<std::ptrdiff_t>(start + len));
      const Matrix<float> x = gather_cols(train_reps, batch_idx);
      std::vector<int> y(len);
      for (std::size_t i = 0; i < len; ++i)
        y[i] = train_labels[static_cast<std::size_t>(batch_idx[i])];
      Matrix<float> logits = w * x;
      logits.colwise() += b.col(0);
      Matrix<float> dlogits;
      const double loss = cross_entropy(logits, y, &dlogits);
      if (!std::isfinite(loss))
        throw DivergenceError("non-finite probe loss at epoch " +
                              std::to_string(epoch));
      gw.noalias() = dlogits * x.transpose();
      gb = dlogits.rowwise().sum();
      opt.step(lr);
    }
    if (!val_labels.empty()) {
      const double v = eval(val_reps, val_labels);
      if (v > best_val) {
        best_val = v;
        best_w = w;
        best_b = b;
      }
    }
  }
  if (!val_labels.empty() && cfg.epochs > 0) {
    w = best_w;
    b = best_b;
  }

  ProbeResult res;
  res.train_acc = eval(train_reps, train_labels);
  res.test_acc = eval(test_reps, test_labels);
  res.head_weight = std::move(w);
  res.head_bias = std::move(b);
  return res;
}

ProbeResult linear_probe(const ModelState& m, const DatasetArchive& probe_train,
                         const DatasetArchive& probe_val,
                         const DatasetArchive& probe_test,
                         const TrainConfig& cfg) {
  Network<float>& net = *m.net;
  const DataMatrix tr = to_data(probe_train);
  const Matrix<float> train_reps = batched_reps(net, tr.x);
  Matrix<float> val_reps;
  std::vector<int> val_labels;
  if (probe_test.size() == 0) throw BadInput("probe needs a test split");
  if (probe_val.size() > 0) {
    const DataMatrix va = to_data(probe_val);
    val_reps = batched_reps(net, va.x);
    val_labels = va.labels;
  }
  const DataMatrix te = to_data(probe_test);
  const Matrix<float> test_reps = batched_reps(net, te.x);
  return train_linear_head(train_reps, tr.labels, val_reps, val_labels,
                           test_reps, te.labels, probe_train.class_count, cfg);
}

void install_head(ModelState& m, const Matrix<float>& weight,
                  const Matrix<float>& bias) {
  auto params = m.net->head_params();
  if (params.size() != 2) throw BadInput("unexpected head layout");
  if (params[0].value->cols() != weight.cols())
    throw BadInput("head width mismatch");
  if (params[0].value->rows() != weight.rows()) {
    // Rebuild the network with the new class count, keeping body params.
    ModelConfig cfg = m.config;
    cfg.class_count = static_cast<int>(weight.rows());
    auto body_snapshot = m.net->body_params();
    std::vector<Matrix<float>> body_values;
    for (const auto& p : body_snapshot) body_values.push_back(*p.value);
    m.net = std::make_shared<Network<float>>(cfg);
    m.config = cfg;
    auto fresh = m.net->body_params();
    for (std::size_t i = 0; i < fresh.size(); ++i)
      *fresh[i].value = body_values[i];
    params = m.net->head_params();
  }
  *params[0].value = weight;
  *params[1].value = bias;
}

ModelState fine_tune_full(ModelState m, const DatasetArchive& target_train,
                          const DatasetArchive& target_val,
                          const TrainConfig& cfg, int n_finetune) {
  if (n_finetune < 0) throw BadParameter("n_finetune must be non-negative");
  if (n_finetune == 0) return m;
  if (static_cast<std::size_t>(n_finetune) > target_train.size())
    throw BadParameter("n_finetune exceeds available samples");

  // Deterministic subsample of the fine-tuning pool.
  RngStream rng(cfg.shuffle_seed, 0x66747375ULL);  // "ftsu"
  std::vector<int> idx(target_train.size());
  std::iota(idx.begin(), idx.end(), 0);
  rng.shuffle(idx);
  idx.resize(static_cast<std::size_t>(n_finetune));

  DatasetArchive sub;
  sub.width = target_train.width;
  sub.height = target_train.height;
  sub.channels = target_train.channels;
  sub.class_count = target_train.class_count;
  sub.seed = target_train.seed;
  for (const int i : idx)
    sub.append(target_train.image(static_cast<std::size_t>(i)),
               target_train.labels[static_cast<std::size_t>(i)]);

  return train(std::move(m), sub, target_val, cfg);
}

GradCheckReport gradient_check(const ModelConfig& cfg, double tolerance,
                               std::uint64_t seed) {
  ModelConfig small = cfg;
  Network<double> net(small);
  RngStream rng(seed, 0x67636b31ULL);  // "gck1"

  const int n = 4;
  Matrix<double> x(small.input_dim(), n);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x.data()[i] = rng.unit_real();
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (auto& l : labels)
    l = static_cast<int>(rng.uniform_below(
        static_cast<std::uint64_t>(small.class_count)));

  auto loss_fn = [&]() {
    const auto [reps, logits] = net.forward(x);
    return cross_entropy_impl<double>(logits, labels, nullptr);
  };

  // Analytic pass.
  {
    const auto [reps, logits] = net.forward(x);
    Matrix<double> dlogits;
    cross_entropy_impl<double>(logits, labels, &dlogits);
    net.backward(dlogits);
  }

  GradCheckReport report;
  auto params = net.all_params();
  for (auto& p : params) {
    const Eigen::Index count = p.value->size();
    const Eigen::Index checks = std::min<Eigen::Index>(count, 40);
    for (Eigen::Index k = 0; k < checks; ++k) {
      const Eigen::Index i =
          static_cast<Eigen::Index>(rng.uniform_below(
              static_cast<std::uint64_t>(count)));
      double* v = p.value->data() + i;
      const double orig = *v;
      const double h = 1e-5 * std::max(1.0, std::abs(orig));
      *v = orig + h;
      const double lp = loss_fn();
      *v = orig - h;
      const double lm = loss_fn();
      *v = orig;
      const double numeric = (lp - lm) / (2.0 * h);
      const double analytic = p.grad->data()[i];
      const double denom =
          std::max({std::abs(numeric), std::abs(analytic), 1e-6});
      const double rel = std::abs(numeric - analytic) / denom;
      report.max_rel_error = std::max(report.max_rel_error, rel);
      ++report.n_checked;
    }
  }
  report.passed = report.max_rel_error < tolerance;
  return report;
}

namespace {

constexpr char kModelMagic[4] = {'T', '2', 'D', 'M'};
constexpr std::uint32_t kModelVersion = 1;

void put_u32(std::ofstream& out, std::uint32_t v) {
  std::uint8_t b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::ifstream& in) {
  std::uint8_t b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void ModelState::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create checkpoint " + path);
  out.write(kModelMagic, 4);
  put_u32(out, kModelVersion);

  nlohmann::json j;
  j["arch"] = config.arch == ArchKind::SmallCnn ? "smallcnn" : "mlp";
  j["conv_channels"] = config.conv_channels;
  j["hidden"] = config.hidden;
  j["rep_dim"] = config.rep_dim;
  j["class_count"] = config.class_count;
  j["resolution"] = config.resolution;
  j["in_channels"] = config.in_channels;
  j["init_seed"] = config.init_seed;
  j["epochs_seen"] = epochs_seen;
  j["best_val_acc"] = best_val_acc;
  const std::string meta = j.dump();
  put_u32(out, static_cast<std::uint32_t>(meta.size()));
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));

  auto params = net->all_params();
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    put_u32(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put_u32(out, static_cast<std::uint32_t>(p.value->rows()));
    put_u32(out, static_cast<std::uint32_t>(p.value->cols()));
    out.write(reinterpret_cast<const char*>(p.value->data()),
              static_cast<std::streamsize>(sizeof(float) *
                                           static_cast<std::size_t>(
                                               p.value->size())));
  }
  if (!out) throw IoError("short write to checkpoint " + path);
}

ModelState ModelState::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kModelMagic, 4) != 0)
    throw FormatError("not a t2d model checkpoint: " + path);
  if (read_u32(in) != kModelVersion)
    throw FormatError("unsupported checkpoint version");
  const std::uint32_t meta_len = read_u32(in);
  std::string meta(meta_len, '\0');
  in.read(meta.data(), meta_len);
  nlohmann::json j = nlohmann::json::parse(meta);

  ModelConfig cfg;
  cfg.arch = j["arch"] == "smallcnn" ? ArchKind::SmallCnn : ArchKind::Mlp;
  cfg.conv_channels = j["conv_channels"];
  cfg.hidden = j["hidden"].get<std::vector<int>>();
  cfg.rep_dim = j["rep_dim"];
  cfg.class_count = j["class_count"];
  cfg.resolution = j["resolution"];
  cfg.in_channels = j["in_channels"];
  cfg.init_seed = j["init_seed"];

  ModelState m = ModelState::init(cfg);
  m.epochs_seen = j["epochs_seen"];
  m.best_val_acc = j["best_val_acc"];

  const std::uint32_t n_blocks = read_u32(in);
  auto params = m.net->all_params();
  if (n_blocks != params.size())
    throw FormatError("checkpoint block count mismatch");
  for (auto& p : params) {
    const std::uint32_t name_len = read_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (name != p.name) throw FormatError("checkpoint block order mismatch");
    const std::uint32_t rows = read_u32(in);
    const std::uint32_t cols = read_u32(in);
    if (rows != p.value->rows() || cols != p.value->cols())
      throw FormatError("checkpoint tensor shape mismatch");
    in.read(reinterpret_cast<char*>(p.value->data()),
            static_cast<std::streamsize>(sizeof(float) *
                                         static_cast<std::size_t>(
                                             p.value->size())));
  }
  if (!in) throw FormatError("truncated checkpoint: " + path);
  return m;
}

}  // namespace t2d
