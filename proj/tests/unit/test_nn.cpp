#include "unit/check.hpp"
#include "unit/support.hpp"

#include "thyrofna/nn/adam.hpp"
#include "thyrofna/nn/layers.hpp"
#include "thyrofna/nn/transformer.hpp"
#include "thyrofna/rng.hpp"

#include <sstream>
#include <string>

using namespace thyrofna;
using namespace thyrofna::nn;

namespace {

constexpr double kTolerance = 1e-6;

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng &rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = rng.uniform(-1.0, 1.0);
  }
  return m;
}

FeatureMap random_map(int c, int h, int w, Rng &rng) {
  FeatureMap f(c, h, w);
  f.data = random_matrix(c, h * w, rng);
  return f;
}

// Scalar probe loss L = sum(R .* f(x)). Checks parameter and input gradients.
// Dropout-style layers draw from a freshly seeded RNG on every call so the
// mask stays fixed across perturbations.
void check_layer(Layer &layer, FeatureMap input, bool training = false) {
  Rng rng(77);
  auto run = [&](const FeatureMap &x) {
    Rng dropout_rng(5);
    return layer.forward(x, ForwardContext{training, &dropout_rng});
  };
  const FeatureMap probe_out = run(input);
  const Matrix r = random_matrix(probe_out.data.rows(), probe_out.data.cols(), rng);
  auto params = layer.parameters();
  zero_grads(params);
  run(input);
  FeatureMap grad_out = probe_out;
  grad_out.data = r;
  const FeatureMap grad_in = layer.backward(grad_out);

  auto loss = [&] { return run(input).data.cwiseProduct(r).sum(); };
  if (!params.empty()) {
    const auto g = testsupport::check_gradients(loss, params, 25, 3);
    CHECK_MESSAGE(g.max_relative_error < kTolerance, layer.kind(), " params: ", g.max_relative_error);
  }
  double worst = 0.0;
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(input.data.size(), 40); ++i) {
    const Eigen::Index k = (i * 7919) % input.data.size();
    const double saved = input.data.data()[k];
    input.data.data()[k] = saved + 1e-5;
    const double up = loss();
    input.data.data()[k] = saved - 1e-5;
    const double down = loss();
    input.data.data()[k] = saved;
    const double numeric = (up - down) / 2e-5;
    const double analytic = grad_in.data.data()[k];
    worst = std::max(worst, std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-7}));
  }
  CHECK_MESSAGE(worst < kTolerance, layer.kind(), " input: ", worst);
}

// Same probe for token-wise modules (tokens x features).
template <typename Forward, typename Backward>
void check_tokens(const char *what, Matrix x, const std::vector<Parameter *> &params, Forward forward,
                  Backward backward) {
  Rng rng(91);
  const Matrix r = random_matrix(forward(x).rows(), forward(x).cols(), rng);
  zero_grads(params);
  forward(x);
  const Matrix grad_in = backward(r);
  auto loss = [&] { return forward(x).cwiseProduct(r).sum(); };
  if (!params.empty()) {
    // Key-projection biases have exactly zero gradient (softmax shift
    // invariance), so the floor sits above finite-difference noise.
    const auto g = testsupport::check_gradients(loss, params, 20, 4, 1e-5, 1e-4);
    CHECK_MESSAGE(g.max_relative_error < kTolerance, std::string(what), " params: ", g.max_relative_error);
  }
  double worst = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double saved = x.data()[k];
    x.data()[k] = saved + 1e-5;
    const double up = loss();
    x.data()[k] = saved - 1e-5;
    const double down = loss();
    x.data()[k] = saved;
    const double numeric = (up - down) / 2e-5;
    const double analytic = grad_in.data()[k];
    worst = std::max(worst, std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-7}));
  }
  CHECK_MESSAGE(worst < kTolerance, std::string(what), " input: ", worst);
}

} // namespace

TEST_SUITE("nn") {

TEST_CASE("conv, pooling, dense, relu, dropout gradients") {
  Rng rng(1);
  Conv2d conv(3, 4, 3, 1, rng);
  check_layer(conv, random_map(3, 7, 6, rng));
  Conv2d conv5(2, 3, 5, 2, rng);
  check_layer(conv5, random_map(2, 6, 6, rng));
  Relu relu;
  check_layer(relu, random_map(3, 5, 5, rng));
  MaxPool2d max_pool(2);
  check_layer(max_pool, random_map(2, 6, 8, rng));
  AvgPool2d avg_pool(3);
  check_layer(avg_pool, random_map(2, 9, 6, rng));
  GlobalAvgPool gap;
  check_layer(gap, random_map(4, 3, 5, rng));
  Dense dense(6, 3, rng);
  check_layer(dense, random_map(6, 1, 1, rng));
  Dropout dropout(0.4);
  check_layer(dropout, random_map(5, 1, 1, rng), true);
}

TEST_CASE("dropout is identity at inference and scales survivors when training") {
  Rng rng(2);
  Dropout d(0.5);
  const auto x = random_map(200, 1, 1, rng);
  CHECK((d.forward(x, ForwardContext{}).data - x.data).norm() == 0.0);
  Rng drop_rng(3);
  const auto y = d.forward(x, ForwardContext{true, &drop_rng});
  int kept = 0;
  for (Eigen::Index i = 0; i < x.data.size(); ++i) {
    if (y.data(i, 0) != 0.0) {
      ++kept;
      CHECK(y.data(i, 0) == doctest::Approx(2.0 * x.data(i, 0)));
    }
  }
  CHECK(kept > 60);
  CHECK(kept < 140);
}

TEST_CASE("token modules: linear, layer norm, gelu, attention, encoder") {
  Rng rng(4);
  Linear linear(5, 3, rng, "lin");
  check_tokens("linear", random_matrix(4, 5, rng), linear.parameters(),
               [&](const Matrix &x) { return linear.forward(x); }, [&](const Matrix &g) { return linear.backward(g); });
  LayerNorm norm(6, "ln");
  // Non-trivial affine parameters so their gradients are exercised.
  for (auto *p : norm.parameters()) {
    p->value = random_matrix(p->value.rows(), p->value.cols(), rng);
  }
  check_tokens("layer_norm", random_matrix(3, 6, rng), norm.parameters(),
               [&](const Matrix &x) { return norm.forward(x); }, [&](const Matrix &g) { return norm.backward(g); });
  Gelu gelu;
  check_tokens("gelu", random_matrix(3, 4, rng), {},
               [&](const Matrix &x) { return gelu.forward(x); }, [&](const Matrix &g) { return gelu.backward(g); });
  MultiHeadSelfAttention attn(8, 2, rng, "attn");
  check_tokens("attention", random_matrix(5, 8, rng), attn.parameters(),
               [&](const Matrix &x) { return attn.forward(x); }, [&](const Matrix &g) { return attn.backward(g); });
  EncoderLayer enc(8, 2, 12, 0.0, rng, "enc");
  check_tokens("encoder", random_matrix(5, 8, rng), enc.parameters(),
               [&](const Matrix &x) { return enc.forward(x, ForwardContext{}); },
               [&](const Matrix &g) { return enc.backward(g); });
}

TEST_CASE("attention rows are probability distributions") {
  Rng rng(6);
  MultiHeadSelfAttention attn(8, 4, rng, "attn");
  attn.forward(random_matrix(13, 8, rng));
  REQUIRE(attn.attention().size() == 4);
  for (const auto &a : attn.attention()) {
    CHECK(a.rows() == 13);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      CHECK(a.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(a.row(i).minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("adam first step moves each weight by about lr against its gradient") {
  Parameter p("p", Matrix::Constant(2, 2, 1.0));
  p.grad << 0.5, -2.0, 1e-3, -7.0;
  Adam adam({&p}, AdamConfig{0.01, 0.9, 0.999, 1e-8, 0.0});
  adam.step();
  // m_hat = g, v_hat = g^2, so the update is lr * g / (|g| + eps).
  CHECK(p.value(0, 0) == doctest::Approx(1.0 - 0.01 * 0.5 / (0.5 + 1e-8)).epsilon(1e-12));
  CHECK(p.value(0, 1) == doctest::Approx(1.0 + 0.01 * 2.0 / (2.0 + 1e-8)).epsilon(1e-12));
  CHECK(p.value(1, 0) == doctest::Approx(1.0 - 0.01 * 1e-3 / (1e-3 + 1e-8)).epsilon(1e-12));
  CHECK(adam.steps() == 1);

  // Coupled weight decay adds wd * w to the gradient before the moments.
  Parameter q("q", Matrix::Constant(1, 1, 2.0));
  q.grad(0, 0) = 0.0;
  Adam decayed({&q}, AdamConfig{0.1, 0.9, 0.999, 1e-8, 0.5});
  decayed.step();
  CHECK(q.value(0, 0) == doctest::Approx(2.0 - 0.1).epsilon(1e-9));
}

TEST_CASE("parameter blobs roundtrip and reject mismatched layouts") {
  Rng rng(9);
  Dense a(4, 3, rng);
  Dense b(4, 3, rng);
  Dense c(5, 3, rng);
  auto pa = a.parameters();
  auto pb = b.parameters();
  std::stringstream blob;
  save_parameters(blob, pa);
  load_parameters(blob, pb);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK((pa[i]->value - pb[i]->value).norm() == 0.0);
  }
  std::stringstream again;
  save_parameters(again, pa);
  CHECK_THROWS_CODE(load_parameters(again, c.parameters()), ErrorCode::CheckpointMismatch);
  std::stringstream junk("garbage");
  CHECK_THROWS_CODE(load_parameters(junk, pb), ErrorCode::CheckpointMismatch);
  CHECK(count_parameters(pa) == 15);
}

TEST_CASE("sequential copies are deep") {
  Rng rng(10);
  Sequential s;
  s.add(std::make_unique<Dense>(3, 2, rng));
  Sequential copy = s;
  copy.parameters()[0]->value.setZero();
  CHECK(s.parameters()[0]->value.norm() > 0.0);
}

}
