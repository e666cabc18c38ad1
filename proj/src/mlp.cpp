#include "uadrive/mlp.hpp"

#include <cmath>

#include "uadrive/error.hpp"
#include "uadrive/rng.hpp"
#include "uadrive/textio.hpp"

namespace uadrive::nn {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstLayer = Eigen::Map<const RowMajor>;
using ConstBias = Eigen::Map<const Eigen::VectorXd>;

void check_weights(const MlpArchitecture& arch, std::span<const double> w) {
  if (w.size() != arch.parameter_count()) {
    throw Error(ErrorCode::DimensionMismatch, "weight vector has " + std::to_string(w.size()) +
                                                  " entries, architecture " + arch.to_string() + " needs " +
                                                  std::to_string(arch.parameter_count()));
  }
}

}  // namespace

// ---------------------------------------------------------------- architecture

MlpArchitecture MlpArchitecture::steering(int n_inputs) {
  return {{n_inputs, 256, 128, 64, 32, 16, 1}};
}

MlpArchitecture MlpArchitecture::parse(const std::string& text) {
  MlpArchitecture arch;
  for (const auto part : textio::split(text, ',')) {
    arch.layer_sizes.push_back(static_cast<int>(textio::parse_int(part)));
  }
  arch.validate();
  return arch;
}

void MlpArchitecture::validate() const {
  if (layer_sizes.size() < 3) {
    throw Error(ErrorCode::ConfigInvalid, "network needs an input, at least one hidden layer and an output");
  }
  for (const int n : layer_sizes) {
    if (n < 1) throw Error(ErrorCode::ConfigInvalid, "layer sizes must be positive");
  }
  if (layer_sizes.back() != 1) throw Error(ErrorCode::ConfigInvalid, "output layer must have one unit");
}

std::size_t MlpArchitecture::parameter_count() const { return weight_offset(layer_count()); }

std::size_t MlpArchitecture::weight_offset(std::size_t layer) const {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l) {
    off += static_cast<std::size_t>(layer_sizes[l]) * layer_sizes[l + 1] + layer_sizes[l + 1];
  }
  return off;
}

std::string MlpArchitecture::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < layer_sizes.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(layer_sizes[i]);
  }
  return out;
}

// ---------------------------------------------------------------- init / forward

double he_scale(const MlpArchitecture& arch, std::size_t layer) {
  return std::sqrt(2.0 / arch.layer_sizes[layer]);
}

WeightVector init_weights(const MlpArchitecture& arch, std::uint64_t seed) {
  arch.validate();
  WeightVector w(arch.parameter_count(), 0.0);
  const rng::CounterRng gen(rng::stream_key(seed, rng::Stream::InitWeights));
  for (std::size_t l = 0; l < arch.layer_count(); ++l) {
    const std::size_t off = arch.weight_offset(l);
    const std::size_t count = static_cast<std::size_t>(arch.layer_sizes[l]) * arch.layer_sizes[l + 1];
    const double scale = he_scale(arch, l);
    gen.fill_normal(std::span<double>(w).subspan(off, count), off);
    for (std::size_t k = 0; k < count; ++k) w[off + k] *= scale;
  }
  return w;
}

double forward(const MlpArchitecture& arch, std::span<const double> w, std::span<const double> input) {
  check_weights(arch, w);
  if (input.size() != arch.input_size()) {
    throw Error(ErrorCode::DimensionMismatch, "input has " + std::to_string(input.size()) + " features, expected " +
                                                  std::to_string(arch.input_size()));
  }
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(input.data(), static_cast<Eigen::Index>(input.size()));
  Eigen::VectorXd z;
  const std::size_t L = arch.layer_count();
  for (std::size_t l = 0; l < L; ++l) {
    const int n_in = arch.layer_sizes[l];
    const int n_out = arch.layer_sizes[l + 1];
    const double* base = w.data() + arch.weight_offset(l);
    z.noalias() = ConstLayer(base, n_out, n_in) * a;
    z += ConstBias(base + static_cast<std::size_t>(n_out) * n_in, n_out);
    if (l + 1 < L) {
      a = z.cwiseMax(0.0);
    } else {
      a = z;
    }
  }
  return a[0];
}

// ---------------------------------------------------------------- batches

Batch Batch::from_samples(std::span<const dataset::Sample> samples) {
  Batch b;
  if (samples.empty()) return b;
  const auto n_in = static_cast<Eigen::Index>(samples.front().features.size());
  b.x.resize(n_in, static_cast<Eigen::Index>(samples.size()));
  b.y.resize(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t j = 0; j < samples.size(); ++j) {
    if (static_cast<Eigen::Index>(samples[j].features.size()) != n_in) {
      throw Error(ErrorCode::DimensionMismatch, "samples disagree on feature width");
    }
    b.x.col(static_cast<Eigen::Index>(j)) =
        Eigen::Map<const Eigen::VectorXd>(samples[j].features.data(), n_in);
    b.y[static_cast<Eigen::Index>(j)] = samples[j].label;
  }
  return b;
}

Batch Batch::gather(const Batch& all, std::span<const std::size_t> columns) {
  Batch b;
  b.x.resize(all.x.rows(), static_cast<Eigen::Index>(columns.size()));
  b.y.resize(static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    b.x.col(static_cast<Eigen::Index>(j)) = all.x.col(static_cast<Eigen::Index>(columns[j]));
    b.y[static_cast<Eigen::Index>(j)] = all.y[static_cast<Eigen::Index>(columns[j])];
  }
  return b;
}

// ---------------------------------------------------------------- workspace

MlpWorkspace::MlpWorkspace(MlpArchitecture arch) : arch_(std::move(arch)) {
  arch_.validate();
  pre_.resize(arch_.layer_count() + 1);
  post_.resize(arch_.layer_count() + 1);
}

const Eigen::RowVectorXd& MlpWorkspace::forward(std::span<const double> w, const Eigen::MatrixXd& x) {
  check_weights(arch_, w);
  if (static_cast<std::size_t>(x.rows()) != arch_.input_size()) {
    throw Error(ErrorCode::DimensionMismatch, "batch feature width does not match the network input");
  }
  const std::size_t L = arch_.layer_count();
  post_[0] = x;
  for (std::size_t l = 0; l < L; ++l) {
    const int n_in = arch_.layer_sizes[l];
    const int n_out = arch_.layer_sizes[l + 1];
    const double* base = w.data() + arch_.weight_offset(l);
    auto& z = pre_[l + 1];
    layer_ = ConstLayer(base, n_out, n_in);
    z.noalias() = layer_ * post_[l];
    z.colwise() += ConstBias(base + static_cast<std::size_t>(n_out) * n_in, n_out);
    if (l + 1 < L) {
      post_[l + 1] = z.cwiseMax(0.0);
    } else {
      post_[l + 1] = z;
    }
  }
  out_ = post_[L].row(0);
  return out_;
}

void MlpWorkspace::backward(std::span<const double> w, const Eigen::RowVectorXd& d_output,
                            std::span<double> grad) {
  check_weights(arch_, w);
  if (grad.size() != w.size()) throw Error(ErrorCode::DimensionMismatch, "gradient buffer has the wrong size");
  const std::size_t L = arch_.layer_count();
  delta_ = d_output;
  for (std::size_t l = L; l-- > 0;) {
    const int n_in = arch_.layer_sizes[l];
    const int n_out = arch_.layer_sizes[l + 1];
    const std::size_t off = arch_.weight_offset(l);
    layer_grad_.noalias() = delta_ * post_[l].transpose();
    const double* src = layer_grad_.data();
    double* dst = grad.data() + off;
    for (std::size_t i = 0, n = static_cast<std::size_t>(n_out) * n_in; i < n; ++i) dst[i] += src[i];
    dst += static_cast<std::size_t>(n_out) * n_in;
    for (int o = 0; o < n_out; ++o) dst[o] += delta_.row(o).sum();
    if (l > 0) {
      layer_ = ConstLayer(w.data() + off, n_out, n_in);
      delta_prev_.noalias() = layer_.transpose() * delta_;
      delta_prev_.array() *= (pre_[l].array() > 0.0).cast<double>();
      std::swap(delta_, delta_prev_);
    }
  }
}

// ---------------------------------------------------------------- loss

LossGrad loss_grad(MlpWorkspace& ws, std::span<const double> w, const Batch& batch) {
  if (batch.size() == 0) throw Error(ErrorCode::DimensionMismatch, "empty batch");
  const auto& out = ws.forward(w, batch.x);
  const Eigen::RowVectorXd resid = out - batch.y;
  const double n = static_cast<double>(batch.size());
  LossGrad lg;
  lg.loss = resid.squaredNorm() / n;
  lg.grad.assign(w.size(), 0.0);
  ws.backward(w, (2.0 / n) * resid, lg.grad);
  return lg;
}

LossGrad loss_grad(const MlpArchitecture& arch, std::span<const double> w,
                   std::span<const dataset::Sample> batch) {
  MlpWorkspace ws(arch);
  return loss_grad(ws, w, Batch::from_samples(batch));
}

double mse(MlpWorkspace& ws, std::span<const double> w, const Batch& batch) {
  if (batch.size() == 0) throw Error(ErrorCode::DimensionMismatch, "empty batch");
  const auto& out = ws.forward(w, batch.x);
  return (out - batch.y).squaredNorm() / static_cast<double>(batch.size());
}

}  // namespace uadrive::nn
