#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "harvestsim/errors.hpp"

namespace harvestsim {

// Fully connected scalar-output network: tanh on hidden layers, identity on
// the output. Parameters live in one flat array laid out per layer as the
// row-major weight matrix followed by the bias vector, which makes the
// optimizer and checkpoint I/O operate on a single span.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<int> dims);  // all parameters zero

  static Mlp initialized(std::vector<int> dims, std::uint64_t seed);

  double forward(std::span<const double> input) const;

  struct Gradients {
    std::vector<double> params;
    std::vector<double> input;
  };
  // Exact reverse-mode gradients of (output * upstream) w.r.t. every
  // parameter and the input.
  Gradients backward(std::span<const double> input, double upstream) const;

  // Hot-path variant: adds the parameter gradients into `grad_out`
  // (size parameter_count()).
  void accumulate_param_gradients(std::span<const double> input,
                                  double upstream,
                                  std::span<double> grad_out) const;

  std::size_t parameter_count() const { return params_.size(); }
  const std::vector<int>& dims() const { return dims_; }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  void save(const std::string& path) const;
  static Mlp load(const std::string& path);

 private:
  void check_input(std::span<const double> input) const;
  // Runs the forward pass, appending every layer's activation (input
  // included) into `acts`; returns the scalar output.
  double forward_collect(std::span<const double> input,
                         std::vector<double>& acts) const;

  std::vector<int> dims_;
  std::vector<double> params_;
  std::vector<std::size_t> layer_offsets_;  // start of each layer's weights
};

std::size_t parameter_count(const std::vector<int>& dims);

// Adam with decoupled weight decay. Deterministic; state arrays match the
// parameter layout.
class AdamW {
 public:
  explicit AdamW(std::size_t n_params, double lr = 0.001,
                 double weight_decay = 0.01);

  void step(std::span<double> params, std::span<const double> grads);

  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  long step_count = 0;

  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }

 private:
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace harvestsim
