#include "harvestsim/mlp.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "harvestsim/io_util.hpp"
#include "harvestsim/rng.hpp"

namespace harvestsim {

std::size_t parameter_count(const std::vector<int>& dims) {
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    count += static_cast<std::size_t>(dims[l]) * dims[l + 1] + dims[l + 1];
  }
  return count;
}

Mlp::Mlp(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.size() < 2) {
    throw ContractError("Mlp needs at least input and output dims");
  }
  for (int d : dims_) {
    if (d < 1) {
      throw ContractError("Mlp layer dims must be >= 1");
    }
  }
  if (dims_.back() != 1) {
    throw ContractError("Mlp output dim must be 1");
  }
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    layer_offsets_.push_back(offset);
    offset += static_cast<std::size_t>(dims_[l]) * dims_[l + 1] + dims_[l + 1];
  }
  params_.assign(offset, 0.0);
}

Mlp Mlp::initialized(std::vector<int> dims, std::uint64_t seed) {
  Mlp net(std::move(dims));
  Rng rng(seed);
  std::size_t p = 0;
  for (std::size_t l = 0; l + 1 < net.dims_.size(); ++l) {
    double bound = std::sqrt(1.0 / net.dims_[l]);
    std::size_t layer_params =
        static_cast<std::size_t>(net.dims_[l]) * net.dims_[l + 1] +
        net.dims_[l + 1];
    for (std::size_t i = 0; i < layer_params; ++i) {
      net.params_[p++] = rng.uniform(-bound, bound);
    }
  }
  return net;
}

void Mlp::check_input(std::span<const double> input) const {
  if (dims_.empty()) {
    throw ContractError("Mlp is uninitialized");
  }
  if (input.size() != static_cast<std::size_t>(dims_.front())) {
    throw ContractError("Mlp input size " + std::to_string(input.size()) +
                        " does not match input dim " +
                        std::to_string(dims_.front()));
  }
}

double Mlp::forward_collect(std::span<const double> input,
                            std::vector<double>& acts) const {
  acts.assign(input.begin(), input.end());
  std::size_t prev_begin = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const int in_dim = dims_[l];
    const int out_dim = dims_[l + 1];
    const double* w = params_.data() + layer_offsets_[l];
    const double* b = w + static_cast<std::size_t>(in_dim) * out_dim;
    const bool hidden = l + 2 < dims_.size();
    std::size_t out_begin = acts.size();
    for (int o = 0; o < out_dim; ++o) {
      double z = b[o];
      const double* row = w + static_cast<std::size_t>(o) * in_dim;
      for (int i = 0; i < in_dim; ++i) {
        z += row[i] * acts[prev_begin + i];
      }
      acts.push_back(hidden ? std::tanh(z) : z);
    }
    prev_begin = out_begin;
  }
  return acts.back();
}

double Mlp::forward(std::span<const double> input) const {
  check_input(input);
  std::vector<double> acts;
  acts.reserve(std::accumulate(dims_.begin(), dims_.end(), 0));
  return forward_collect(input, acts);
}

void Mlp::accumulate_param_gradients(std::span<const double> input,
                                     double upstream,
                                     std::span<double> grad_out) const {
  check_input(input);
  if (grad_out.size() != params_.size()) {
    throw ContractError("gradient buffer size mismatch");
  }
  std::vector<double> acts;
  acts.reserve(std::accumulate(dims_.begin(), dims_.end(), 0));
  forward_collect(input, acts);

  // Activation start offsets per layer (layer 0 = the input itself).
  std::vector<std::size_t> starts(dims_.size());
  std::size_t s = 0;
  for (std::size_t l = 0; l < dims_.size(); ++l) {
    starts[l] = s;
    s += static_cast<std::size_t>(dims_[l]);
  }

  std::vector<double> delta(1, upstream);  // d(out)/dz of the output layer
  for (std::size_t l = dims_.size() - 1; l-- > 0;) {
    const int in_dim = dims_[l];
    const int out_dim = dims_[l + 1];
    const double* w = params_.data() + layer_offsets_[l];
    double* gw = grad_out.data() + layer_offsets_[l];
    double* gb = gw + static_cast<std::size_t>(in_dim) * out_dim;
    const double* a_in = acts.data() + starts[l];

    std::vector<double> delta_prev(static_cast<std::size_t>(in_dim), 0.0);
    for (int o = 0; o < out_dim; ++o) {
      const double d = delta[static_cast<std::size_t>(o)];
      gb[o] += d;
      const double* row = w + static_cast<std::size_t>(o) * in_dim;
      double* grow = gw + static_cast<std::size_t>(o) * in_dim;
      for (int i = 0; i < in_dim; ++i) {
        grow[i] += d * a_in[i];
        delta_prev[static_cast<std::size_t>(i)] += d * row[i];
      }
    }
    if (l > 0) {
      // Entering a tanh layer: fold in the activation derivative.
      for (int i = 0; i < in_dim; ++i) {
        double a = a_in[i];
        delta_prev[static_cast<std::size_t>(i)] *= 1.0 - a * a;
      }
    }
    delta = std::move(delta_prev);
  }
}

Mlp::Gradients Mlp::backward(std::span<const double> input,
                             double upstream) const {
  check_input(input);
  Gradients grads;
  grads.params.assign(params_.size(), 0.0);
  accumulate_param_gradients(input, upstream, grads.params);

  // Input gradient: same reverse walk, but propagated through layer 0's
  // weights as well. Recompute cheaply via the chain on the first layer.
  std::vector<double> acts;
  forward_collect(input, acts);
  std::vector<std::size_t> starts(dims_.size());
  std::size_t s = 0;
  for (std::size_t l = 0; l < dims_.size(); ++l) {
    starts[l] = s;
    s += static_cast<std::size_t>(dims_[l]);
  }
  std::vector<double> delta(1, upstream);
  for (std::size_t l = dims_.size() - 1; l-- > 0;) {
    const int in_dim = dims_[l];
    const int out_dim = dims_[l + 1];
    const double* w = params_.data() + layer_offsets_[l];
    const double* a_in = acts.data() + starts[l];
    std::vector<double> delta_prev(static_cast<std::size_t>(in_dim), 0.0);
    for (int o = 0; o < out_dim; ++o) {
      const double d = delta[static_cast<std::size_t>(o)];
      const double* row = w + static_cast<std::size_t>(o) * in_dim;
      for (int i = 0; i < in_dim; ++i) {
        delta_prev[static_cast<std::size_t>(i)] += d * row[i];
      }
    }
    if (l > 0) {
      for (int i = 0; i < in_dim; ++i) {
        double a = a_in[i];
        delta_prev[static_cast<std::size_t>(i)] *= 1.0 - a * a;
      }
    }
    delta = std::move(delta_prev);
  }
  grads.input = std::move(delta);
  return grads;
}

void Mlp::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot write checkpoint: " + path);
  }
  out << "freyr-ckpt v1\n";
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    out << (i ? " " : "") << dims_[i];
  }
  out << "\n";
  for (double p : params_) {
    out << format_double(p) << "\n";
  }
  if (!out) {
    throw ConfigError("failed writing checkpoint: " + path);
  }
}

Mlp Mlp::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open checkpoint: " + path);
  }
  std::string line;
  if (!std::getline(in, line) || line != "freyr-ckpt v1") {
    throw ParseError(path + ": bad checkpoint magic");
  }
  if (!std::getline(in, line)) {
    throw ParseError(path + ": missing dims line");
  }
  std::vector<int> dims;
  {
    std::istringstream dims_in(line);
    int d;
    while (dims_in >> d) {
      dims.push_back(d);
    }
    if (dims.size() < 2) {
      throw ParseError(path + ": dims line needs at least two entries");
    }
  }
  Mlp net(dims);
  for (std::size_t i = 0; i < net.params_.size(); ++i) {
    if (!std::getline(in, line)) {
      throw ParseError(path + ": truncated checkpoint (expected " +
                       std::to_string(net.params_.size()) + " parameters)");
    }
    net.params_[i] =
        parse_double(line, path + ":" + std::to_string(i + 3));
  }
  return net;
}

AdamW::AdamW(std::size_t n_params, double lr_in, double weight_decay_in)
    : lr(lr_in),
      weight_decay(weight_decay_in),
      m_(n_params, 0.0),
      v_(n_params, 0.0) {}

void AdamW::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ContractError("AdamW state does not match parameter shape");
  }
  ++step_count;
  const double bias1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
  const double bias2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1 * m_[i] + (1.0 - beta1) * grads[i];
    v_[i] = beta2 * v_[i] + (1.0 - beta2) * grads[i] * grads[i];
    const double m_hat = m_[i] / bias1;
    const double v_hat = v_[i] / bias2;
    params[i] -=
        lr * (m_hat / (std::sqrt(v_hat) + eps) + weight_decay * params[i]);
  }
}

}  // namespace harvestsim
