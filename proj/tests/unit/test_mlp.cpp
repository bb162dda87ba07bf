#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "harvestsim/mlp.hpp"
#include "harvestsim/rng.hpp"

using namespace harvestsim;

namespace {

std::vector<double> random_input(int n, Rng& rng) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (double& v : x) {
    v = rng.uniform(-1.0, 1.0);
  }
  return x;
}

// Central finite differences of the scalar output w.r.t. every parameter.
double max_gradient_error(Mlp& net, std::span<const double> input) {
  const double h = 1e-5;
  Mlp::Gradients grads = net.backward(input, 1.0);
  double worst = 0.0;
  auto params = net.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = net.forward(input);
    params[i] = saved - h;
    const double down = net.forward(input);
    params[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    const double bp = grads.params[i];
    const double err =
        std::abs(bp - fd) / std::max({std::abs(bp), std::abs(fd), 1.0});
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace

TEST_CASE("parameter counts match the closed form") {
  CHECK(parameter_count({11, 32, 16, 1}) == 929);
  CHECK(2 * parameter_count({11, 32, 16, 1}) == 1858);
  CHECK(parameter_count({1, 1}) == 2);
  CHECK(parameter_count({3, 5, 1}) == 26);
  Mlp net({11, 32, 16, 1});
  CHECK(net.parameter_count() == 929);
}

TEST_CASE("zero network maps everything to zero") {
  Mlp net({11, 32, 16, 1});
  std::vector<double> input(11, 0.7);
  CHECK(net.forward(input) == 0.0);
}

TEST_CASE("single linear layer computes w*x + b") {
  Mlp net({1, 1});
  net.params()[0] = 2.5;  // weight
  net.params()[1] = -1.0; // bias
  std::vector<double> x{3.0};
  CHECK(net.forward(x) == 2.5 * 3.0 - 1.0);
  Mlp::Gradients grads = net.backward(x, 1.0);
  CHECK(grads.params[0] == 3.0);  // d(out)/dw = x
  CHECK(grads.params[1] == 1.0);  // d(out)/db = 1
  CHECK(grads.input[0] == 2.5);   // d(out)/dx = w
}

TEST_CASE("invalid shapes are rejected") {
  CHECK_THROWS_AS(Mlp({5}), ContractError);
  CHECK_THROWS_AS(Mlp({5, 3, 2}), ContractError);  // output dim must be 1
  CHECK_THROWS_AS(Mlp({0, 1}), ContractError);
  Mlp net({3, 1});
  std::vector<double> wrong(4, 0.0);
  CHECK_THROWS_AS(net.forward(wrong), ContractError);
}

TEST_CASE("backprop matches central finite differences") {
  const std::vector<std::vector<int>> shapes = {
      {1, 1}, {3, 5, 1}, {2, 4, 4, 1}, {11, 32, 16, 1}};
  Rng rng(2024);
  double worst = 0.0;
  for (const auto& dims : shapes) {
    for (int rep = 0; rep < 4; ++rep) {
      Mlp net = Mlp::initialized(dims, rng.next_u64());
      auto input = random_input(dims.front(), rng);
      worst = std::max(worst, max_gradient_error(net, input));
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("input gradient matches finite differences") {
  Rng rng(5);
  Mlp net = Mlp::initialized({4, 8, 1}, 77);
  auto input = random_input(4, rng);
  Mlp::Gradients grads = net.backward(input, 1.0);
  const double h = 1e-5;
  for (std::size_t i = 0; i < input.size(); ++i) {
    auto perturbed = input;
    perturbed[i] += h;
    const double up = net.forward(perturbed);
    perturbed[i] -= 2 * h;
    const double down = net.forward(perturbed);
    const double fd = (up - down) / (2 * h);
    CHECK(std::abs(grads.input[i] - fd) < 1e-7);
  }
}

TEST_CASE("zero upstream gradient zeroes everything") {
  Mlp net = Mlp::initialized({5, 6, 1}, 3);
  std::vector<double> input(5, 0.3);
  Mlp::Gradients grads = net.backward(input, 0.0);
  for (double g : grads.params) {
    CHECK(g == 0.0);
  }
}

TEST_CASE("upstream gradient scales linearly") {
  Mlp net = Mlp::initialized({3, 4, 1}, 9);
  std::vector<double> input{0.1, -0.2, 0.5};
  Mlp::Gradients g1 = net.backward(input, 1.0);
  Mlp::Gradients g3 = net.backward(input, 3.0);
  for (std::size_t i = 0; i < g1.params.size(); ++i) {
    CHECK(g3.params[i] == doctest::Approx(3.0 * g1.params[i]).epsilon(1e-12));
  }
}

TEST_CASE("adamw first step matches the update equations") {
  // Hand evaluation with param=1, grad=1 and the default hyperparameters.
  const double lr = 0.001, b1 = 0.9, b2 = 0.999, eps = 1e-8, wd = 0.01;
  const double m = (1 - b1) * 1.0;
  const double v = (1 - b2) * 1.0;
  const double m_hat = m / (1 - b1);
  const double v_hat = v / (1 - b2);
  const double expected =
      1.0 - lr * (m_hat / (std::sqrt(v_hat) + eps) + wd * 1.0);

  std::vector<double> params{1.0};
  std::vector<double> grads{1.0};
  AdamW opt(1);
  opt.step(params, grads);
  CHECK(params[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("zero gradient with zero decay leaves parameters untouched") {
  std::vector<double> params{0.4, -1.7};
  std::vector<double> grads{0.0, 0.0};
  AdamW opt(2, 0.001, 0.0);
  opt.step(params, grads);
  CHECK(params[0] == 0.4);
  CHECK(params[1] == -1.7);
}

TEST_CASE("adamw is deterministic") {
  std::vector<double> pa{1.0, 2.0}, pb{1.0, 2.0};
  std::vector<double> g{0.3, -0.6};
  AdamW a(2), b(2);
  for (int i = 0; i < 5; ++i) {
    a.step(pa, g);
    b.step(pb, g);
  }
  CHECK(pa[0] == pb[0]);
  CHECK(pa[1] == pb[1]);
}

TEST_CASE("initialization is seed-deterministic and bounded by fan-in") {
  Mlp a = Mlp::initialized({11, 32, 16, 1}, 42);
  Mlp b = Mlp::initialized({11, 32, 16, 1}, 42);
  Mlp c = Mlp::initialized({11, 32, 16, 1}, 43);
  auto pa = a.params(), pb = b.params(), pc = c.params();
  bool differs = false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i] == pb[i]);
    differs = differs || pa[i] != pc[i];
  }
  CHECK(differs);
  // First layer bound: sqrt(1/11).
  const double bound = std::sqrt(1.0 / 11.0);
  for (std::size_t i = 0; i < 11u * 32u + 32u; ++i) {
    CHECK(std::abs(pa[i]) <= bound);
  }
}

TEST_CASE("checkpoint save/load round trip is exact") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "hsim_mlp_ckpt";
  fs::create_directories(dir);
  const std::string path = (dir / "net.ckpt").string();

  Mlp net = Mlp::initialized({11, 32, 16, 1}, 7);
  net.save(path);

  // Format: magic line, dims line, one parameter per line.
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "freyr-ckpt v1");
  std::getline(in, line);
  CHECK(line == "11 32 16 1");

  Mlp loaded = Mlp::load(path);
  Rng rng(88);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x = random_input(11, rng);
    CHECK(net.forward(x) == loaded.forward(x));
  }
}

TEST_CASE("truncated and malformed checkpoints are rejected") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "hsim_mlp_bad";
  fs::create_directories(dir);
  const std::string good = (dir / "good.ckpt").string();
  Mlp::initialized({3, 2, 1}, 5).save(good);

  // Drop the last line.
  std::ifstream in(good);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    lines.push_back(line);
  }
  const std::string truncated = (dir / "truncated.ckpt").string();
  std::ofstream out(truncated);
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
    out << lines[i] << "\n";
  }
  out.close();
  CHECK_THROWS_AS(Mlp::load(truncated), ParseError);

  const std::string bad_magic = (dir / "magic.ckpt").string();
  std::ofstream bm(bad_magic);
  bm << "not-a-checkpoint\n1 1\n0\n0\n";
  bm.close();
  CHECK_THROWS_AS(Mlp::load(bad_magic), ParseError);
}
