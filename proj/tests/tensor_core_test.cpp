#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "ratgan/ops.hpp"
#include "ratgan/rng.hpp"
#include "ratgan/tensor.hpp"

#include <cmath>
#include <vector>

using namespace ratgan;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> data(static_cast<size_t>(shape_numel(shape)));
  for (double& v : data) v = lo + (hi - lo) * rng.uniform();
  return Tensor::from_data(std::move(shape), std::move(data));
}

// Reduce an arbitrary tensor to a scalar through a fixed random projection, so
// grad_check exercises every output component with distinct weights.
Tensor project(const Tensor& t, uint64_t seed) {
  Rng rng(seed);
  const int n = static_cast<int>(t.size());
  std::vector<double> r(static_cast<size_t>(n));
  for (double& v : r) v = -1.0 + 2.0 * rng.uniform();
  Tensor rt = Tensor::from_data({n}, std::move(r));
  return dot(reshape(t, {n}), rt);
}

void expect_close(const std::vector<double>& got, const std::vector<double>& want,
                  double tol) {
  REQUIRE(got.size() == want.size());
  for (size_t i = 0; i < got.size(); ++i) {
    CAPTURE(i);
    CHECK(std::fabs(got[i] - want[i]) <= tol);
  }
}

}  // namespace

TEST_CASE("matmul identity and annihilator cases") {
  Tensor eye = Tensor::from_data({2, 2}, {1, 0, 0, 1});
  Tensor a = Tensor::from_data({2, 2}, {1, 2, 3, 4});
  expect_close(matmul(eye, a).data(), {1, 2, 3, 4}, 0.0);

  Tensor z = Tensor::zeros({2, 3});
  Tensor b = Tensor::from_data({3, 2}, {5, -1, 2, 7, 0.5, 3});
  expect_close(matmul(z, b).data(), {0, 0, 0, 0}, 0.0);
}

TEST_CASE("matmul matches the triple-loop reference") {
  Rng rng(11);
  Tensor a = random_tensor({2, 3}, rng);
  Tensor b = random_tensor({3, 2}, rng);
  const auto want = oracle::matmul(a.data(), b.data(), 2, 3, 2);
  expect_close(matmul(a, b).data(), want, 1e-12);

  Tensor c = random_tensor({7, 5}, rng);
  Tensor d = random_tensor({5, 9}, rng);
  expect_close(matmul(c, d).data(), oracle::matmul(c.data(), d.data(), 7, 5, 9), 1e-12);
}

TEST_CASE("matmul rejects mismatched inner dimensions, naming both shapes") {
  Tensor a = Tensor::zeros({2, 3});
  Tensor b = Tensor::zeros({4, 2});
  try {
    matmul(a, b);
    FAIL("expected a shape error");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2,3]") != std::string::npos);
    CHECK(msg.find("[4,2]") != std::string::npos);
  }
}

TEST_CASE("conv2d identity kernel and counting case") {
  Rng rng(3);
  Tensor x = random_tensor({1, 4, 4}, rng);
  Tensor w = Tensor::from_data({1, 1, 1, 1}, {1.0});
  expect_close(conv2d(x, w, 1, 0).data(), x.data(), 0.0);

  Tensor ones_in = Tensor::full({1, 5, 5}, 1.0);
  Tensor ones_k = Tensor::full({1, 1, 3, 3}, 1.0);
  Tensor y = conv2d(ones_in, ones_k, 1, 0);
  CHECK(y.shape() == std::vector<int>{1, 3, 3});
  expect_close(y.data(), std::vector<double>(9, 9.0), 0.0);
}

TEST_CASE("conv2d matches the sliding-window reference") {
  Rng rng(17);
  Tensor x = random_tensor({2, 4, 4}, rng);
  Tensor w = random_tensor({3, 2, 3, 3}, rng);
  for (const auto [stride, pad] : {std::pair{1, 0}, std::pair{1, 1}, std::pair{2, 1}}) {
    CAPTURE(stride);
    CAPTURE(pad);
    Tensor y = conv2d(x, w, stride, pad);
    const auto want =
        oracle::conv2d(x.data(), 2, 4, 4, w.data(), 3, 3, 3, stride, pad);
    expect_close(y.data(), want, 1e-12);
  }
}

TEST_CASE("conv2d rejects channel mismatch") {
  Tensor x = Tensor::zeros({2, 4, 4});
  Tensor w = Tensor::zeros({3, 5, 3, 3});
  CHECK_THROWS_AS(conv2d(x, w, 1, 1), ShapeError);
}

TEST_CASE("activations at zero and under saturation") {
  Tensor zero = Tensor::scalar(0.0);
  CHECK(sigmoid(zero).value() == 0.5);
  CHECK(tanh_act(zero).value() == 0.0);

  // High-precision value of 1/(1+e^40).
  const double want = 4.248354255291588995e-18;
  const double got = sigmoid(Tensor::scalar(-40.0)).value();
  CHECK(std::isfinite(got));
  CHECK(std::fabs(got - want) / want < 1e-12);

  for (const double v : {-50.0, 50.0}) {
    CHECK(std::isfinite(sigmoid(Tensor::scalar(v)).value()));
    CHECK(std::isfinite(tanh_act(Tensor::scalar(v)).value()));
    CHECK(std::isfinite(leaky_relu(Tensor::scalar(v)).value()));
  }
  CHECK(leaky_relu(Tensor::scalar(-5.0)).value() == doctest::Approx(-1.0));
  CHECK(leaky_relu(Tensor::scalar(5.0)).value() == 5.0);
}

TEST_CASE("channel_shuffle permutation, identity, and round trip") {
  // Four channels of 1x1 so the channel order is directly visible.
  Tensor x = Tensor::from_data({4, 1, 1}, {0, 1, 2, 3});
  expect_close(channel_shuffle(x, 2).data(), {0, 2, 1, 3}, 0.0);
  expect_close(channel_shuffle(x, 1).data(), x.data(), 0.0);

  Rng rng(5);
  Tensor big = random_tensor({12, 3, 3}, rng);
  for (const int groups : {2, 3, 4, 6}) {
    Tensor once = channel_shuffle(big, groups);
    Tensor back = channel_shuffle(once, 12 / groups);
    expect_close(back.data(), big.data(), 0.0);
  }
  CHECK_THROWS_AS(channel_shuffle(big, 5), ConfigError);
}

TEST_CASE("group_norm zero-variance, moment, and collapse cases") {
  Tensor c = Tensor::full({4, 3, 3}, 2.5);
  expect_close(group_norm(c, 2, 1e-5).data(), std::vector<double>(36, 0.0), 1e-12);

  Rng rng(23);
  Tensor x = random_tensor({8, 5, 5}, rng);
  const int groups = 4, per = 2;
  Tensor y = group_norm(x, groups, 1e-9);
  for (int g = 0; g < groups; ++g) {
    const auto m = oracle::moments(y.data().data() + g * per * 25, per * 25);
    CHECK(std::fabs(m.mean) <= 1e-9);
    CHECK(std::fabs(m.var - 1.0) <= 1e-6);
  }

  Tensor single = group_norm(x, 1, 1e-9);
  const auto all = oracle::moments(single.data().data(), single.data().size());
  CHECK(std::fabs(all.mean) <= 1e-9);
  CHECK(std::fabs(all.var - 1.0) <= 1e-6);
  CHECK_THROWS_AS(group_norm(x, 3, 1e-9), ConfigError);
}

TEST_CASE("global_avg_pool constants and reference") {
  Tensor sevens = Tensor::full({3, 4, 4}, 7.0);
  expect_close(global_avg_pool(sevens).data(), {7, 7, 7}, 0.0);

  Tensor tiny = Tensor::from_data({3, 1, 1}, {1.5, -2.0, 0.25});
  expect_close(global_avg_pool(tiny).data(), {1.5, -2.0, 0.25}, 0.0);

  Rng rng(29);
  Tensor x = random_tensor({5, 6, 7}, rng);
  expect_close(global_avg_pool(x).data(), oracle::global_avg_pool(x.data(), 5, 6, 7),
               1e-12);
}

TEST_CASE("nearest_upsample identity, block, and reference") {
  Rng rng(31);
  Tensor x = random_tensor({2, 3, 3}, rng);
  expect_close(nearest_upsample(x, 1).data(), x.data(), 0.0);

  Tensor px = Tensor::from_data({1, 1, 1}, {3.75});
  expect_close(nearest_upsample(px, 2).data(), std::vector<double>(4, 3.75), 0.0);

  expect_close(nearest_upsample(x, 2).data(),
               oracle::nearest_upsample(x.data(), 2, 3, 3, 2), 0.0);
}

TEST_CASE("backward on simple analytic graphs") {
  Rng rng(37);
  Tensor x = random_tensor({3, 4}, rng);
  x.set_requires_grad(true);

  SUBCASE("sum gives all-ones gradient") {
    Tape tape;
    backward(sum(x));
    expect_close(x.grad(), std::vector<double>(12, 1.0), 0.0);
  }

  SUBCASE("sum of squares gives 2x") {
    Tape tape;
    backward(sum(mul(x, x)));
    std::vector<double> want(x.data());
    for (double& v : want) v *= 2.0;
    expect_close(x.grad(), want, 1e-15);
  }

  SUBCASE("repeated backward accumulates") {
    Tape tape;
    Tensor root = sum(x);
    backward(root);
    backward(root);
    expect_close(x.grad(), std::vector<double>(12, 2.0), 0.0);
  }

  SUBCASE("intermediates reachable from the root get gradients too") {
    Tape tape;
    Tensor y = mul(x, x);
    backward(sum(y));
    expect_close(y.grad(), std::vector<double>(12, 1.0), 0.0);
  }

  SUBCASE("non-scalar root is a usage error") {
    Tape tape;
    Tensor y = mul(x, x);
    CHECK_THROWS_AS(backward(y), UsageError);
  }
}

TEST_CASE("backward through a composite conv-activation-reduce graph") {
  Rng rng(41);
  Tensor x = random_tensor({2, 4, 4}, rng);
  Tensor w = random_tensor({3, 2, 3, 3}, rng, -0.5, 0.5);
  const double err_x = grad_check(
      [&](const Tensor& t) { return mean(tanh_act(conv2d(t, w, 1, 1))); }, x, 1e-5);
  CHECK(err_x < 1e-4);
  const double err_w = grad_check(
      [&](const Tensor& t) { return mean(tanh_act(conv2d(x, t, 1, 1))); }, w, 1e-5);
  CHECK(err_w < 1e-4);
}

TEST_CASE("grad_check handles linear and constant functions") {
  Rng rng(43);
  Tensor x = random_tensor({6}, rng);
  Tensor r = random_tensor({6}, rng);
  CHECK(grad_check([&](const Tensor& t) { return dot(t, r); }, x, 1e-5) < 1e-10);
  CHECK(grad_check([](const Tensor&) { return Tensor::scalar(1.25); }, x, 1e-5) == 0.0);
}

TEST_CASE("every differentiable op passes a finite-difference check over many seeds") {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    CAPTURE(seed);
    Rng rng(seed);
    Tensor v = random_tensor({6}, rng);
    Tensor m = random_tensor({3, 4}, rng);
    Tensor img = random_tensor({4, 4, 4}, rng);
    Tensor other_v = random_tensor({6}, rng);
    Tensor other_m = random_tensor({4, 5}, rng);
    Tensor cat_partner = random_tensor({2, 4}, rng);
    Tensor kern = random_tensor({2, 4, 3, 3}, rng, -0.5, 0.5);
    // Keep strictly-positive inputs away from the sqrt/reciprocal singularities.
    Tensor pos = random_tensor({6}, rng, 0.5, 1.5);

    const struct {
      std::string name;
      const Tensor& at;
      std::function<Tensor(const Tensor&)> f;
    } cases[] = {
        {"add", v, [&](const Tensor& t) { return project(add(t, other_v), seed); }},
        {"sub", v, [&](const Tensor& t) { return project(sub(other_v, t), seed); }},
        {"mul", v, [&](const Tensor& t) { return project(mul(t, other_v), seed); }},
        {"neg", v, [&](const Tensor& t) { return project(neg(t), seed); }},
        {"scale", v, [&](const Tensor& t) { return project(scale(t, -1.7), seed); }},
        {"add_scalar", v,
         [&](const Tensor& t) { return project(add_scalar(t, 0.3), seed); }},
        {"sigmoid", v, [&](const Tensor& t) { return project(sigmoid(t), seed); }},
        {"tanh", v, [&](const Tensor& t) { return project(tanh_act(t), seed); }},
        {"leaky_relu", v,
         [&](const Tensor& t) { return project(leaky_relu(t), seed); }},
        {"relu", v, [&](const Tensor& t) { return project(relu(t), seed); }},
        {"reciprocal", pos,
         [&](const Tensor& t) { return project(reciprocal(t), seed); }},
        {"sqrt", pos, [&](const Tensor& t) { return project(sqrt_elem(t), seed); }},
        {"pow", pos, [&](const Tensor& t) { return project(pow_elem(t, 2.5), seed); }},
        {"sum", v, [&](const Tensor& t) { return sum(t); }},
        {"mean", img, [&](const Tensor& t) { return mean(t); }},
        {"broadcast_scalar", Tensor::scalar(0.7),
         [&](const Tensor& t) { return project(broadcast_scalar(t, {2, 3}), seed); }},
        {"channel_sum", img,
         [&](const Tensor& t) { return project(channel_sum(t), seed); }},
        {"broadcast_spatial", v,
         [&](const Tensor& t) { return project(broadcast_spatial(t, 2, 3), seed); }},
        {"reshape", m, [&](const Tensor& t) { return project(reshape(t, {4, 3}), seed); }},
        {"transpose", m, [&](const Tensor& t) { return project(transpose(t), seed); }},
        {"concat", m,
         [&](const Tensor& t) { return project(concat(t, cat_partner), seed); }},
        {"slice", img, [&](const Tensor& t) { return project(slice(t, 1, 3), seed); }},
        {"embed_slice", m,
         [&](const Tensor& t) { return project(embed_slice(t, 7, 2), seed); }},
        {"matmul_lhs", m,
         [&](const Tensor& t) { return project(matmul(t, other_m), seed); }},
        {"matmul_rhs", other_m,
         [&](const Tensor& t) { return project(matmul(m, t), seed); }},
        {"conv2d_x", img,
         [&](const Tensor& t) { return project(conv2d(t, kern, 2, 1), seed); }},
        {"conv2d_w", kern,
         [&](const Tensor& t) { return project(conv2d(img, t, 2, 1), seed); }},
        {"channel_shuffle", img,
         [&](const Tensor& t) { return project(channel_shuffle(t, 2), seed); }},
        {"group_norm", img,
         [&](const Tensor& t) { return project(group_norm(t, 2, 1e-5), seed); }},
        {"global_avg_pool", img,
         [&](const Tensor& t) { return project(global_avg_pool(t), seed); }},
        {"nearest_upsample", img,
         [&](const Tensor& t) { return project(nearest_upsample(t, 2), seed); }},
        {"block_sum_pool", img,
         [&](const Tensor& t) { return project(block_sum_pool(t, 2), seed); }},
        {"l2_norm", pos, [&](const Tensor& t) { return l2_norm(t); }},
    };
    for (const auto& c : cases) {
      CAPTURE(c.name);
      CHECK(grad_check(c.f, c.at, 1e-5) < 1e-4);
    }
  }
}

TEST_CASE("second-order gradients flow through a rebuilt graph") {
  // f(x) = sum(x^3); first derivative 3x^2, second derivative 6x obtained by
  // differentiating the constructed gradient again.
  Rng rng(47);
  Tensor x = random_tensor({5}, rng, 0.2, 1.0);
  x.set_requires_grad(true);
  Tape tape;
  Tensor y = sum(mul(mul(x, x), x));
  std::vector<Tensor> g = take_grad(y, {x}, /*create_graph=*/true);
  std::vector<double> want_first(x.data());
  for (double& v : want_first) v = 3.0 * v * v;
  expect_close(g[0].data(), want_first, 1e-12);

  backward(sum(g[0]));
  std::vector<double> want_second(x.data());
  for (double& v : want_second) v *= 6.0;
  expect_close(x.grad(), want_second, 1e-12);
}

TEST_CASE("take_grad returns zeros for unreachable inputs") {
  Rng rng(53);
  Tensor x = random_tensor({4}, rng);
  Tensor unused = random_tensor({4}, rng);
  x.set_requires_grad(true);
  unused.set_requires_grad(true);
  Tape tape;
  Tensor y = sum(mul(x, x));
  auto gs = take_grad(y, {x, unused}, false);
  std::vector<double> want(x.data());
  for (double& v : want) v *= 2.0;
  expect_close(gs[0].data(), want, 1e-15);
  expect_close(gs[1].data(), std::vector<double>(4, 0.0), 0.0);
}

TEST_CASE("recording can be suspended") {
  Rng rng(59);
  Tensor x = random_tensor({4}, rng);
  x.set_requires_grad(true);
  Tape tape;
  Tensor y;
  {
    NoGradGuard guard;
    y = sum(mul(x, x));
  }
  CHECK_FALSE(y.requires_grad());
  CHECK_THROWS_AS(backward(y), UsageError);
  CHECK_FALSE(x.detach().requires_grad());
}

TEST_CASE("non-finite values are rejected at op boundaries") {
  CHECK_THROWS_AS(Tensor::from_data({2}, {1.0, std::nan("")}), NumericError);
  Tensor z = Tensor::zeros({2});
  CHECK_THROWS_AS(reciprocal(z), NumericError);
}
