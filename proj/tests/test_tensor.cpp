#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dlac/rng.hpp"
#include "dlac/tensor.hpp"
#include "oracles.hpp"

using dlac::Tensor;
using DTensor = dlac::TensorT<double>;

namespace {

// Random values bounded away from the ReLU kink so finite differences stay
// one-sided.
template <typename T>
dlac::TensorT<T> random_leaf(std::vector<int> shape, dlac::Rng& rng, bool requires_grad = true) {
  std::vector<T> data(dlac::shape_numel(shape));
  for (auto& v : data) {
    const double mag = 0.1 + 0.9 * rng.uniform();
    v = static_cast<T>(rng.uniform() < 0.5 ? -mag : mag);
  }
  return dlac::TensorT<T>::from_data(std::move(shape), std::move(data), requires_grad);
}

}  // namespace

TEST_CASE("elementwise basics") {
  auto r = relu(Tensor::from_data({3}, {-1.0f, 0.0f, 2.0f}));
  CHECK(r.value() == std::vector<float>{0.0f, 0.0f, 2.0f});

  auto s = add(Tensor::from_data({2}, {1.0f, 2.0f}), Tensor::from_data({2}, {3.0f, 4.0f}));
  CHECK(s.value() == std::vector<float>{4.0f, 6.0f});

  auto x = Tensor::from_data({2, 2}, {1.0f, -2.0f, 3.0f, 4.0f}, true);
  auto z = mul(x, Tensor::zeros({2, 2}));
  CHECK(z.value() == std::vector<float>(4, 0.0f));
  auto loss = sum(z);
  loss.backward();
  CHECK(x.grad() == std::vector<float>(4, 0.0f));
}

TEST_CASE("elementwise shape errors name both shapes") {
  auto a = Tensor::zeros({2, 3});
  auto b = Tensor::zeros({3, 2});
  CHECK_THROWS_WITH_AS(add(a, b), doctest::Contains("[2x3]"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(mul(a, b), doctest::Contains("[3x2]"), std::invalid_argument);
}

TEST_CASE("scalar-with-tensor broadcasting") {
  auto x = Tensor::from_data({3}, {1.0f, 2.0f, 3.0f}, true);
  auto c = Tensor::scalar(2.0f, true);
  auto y = mul(x, c);
  CHECK(y.value() == std::vector<float>{2.0f, 4.0f, 6.0f});
  auto loss = sum(y);
  loss.backward();
  CHECK(x.grad() == std::vector<float>{2.0f, 2.0f, 2.0f});
  CHECK(c.grad()[0] == 6.0f);  // sum of x
}

TEST_CASE("matmul basics") {
  auto eye = Tensor::from_data({2, 2}, {1.0f, 0.0f, 0.0f, 1.0f});
  auto m = Tensor::from_data({2, 2}, {1.0f, 2.0f, 3.0f, 4.0f});
  CHECK(matmul(eye, m).value() == m.value());

  auto a = Tensor::from_data({1, 2}, {1.0f, 2.0f});
  auto b = Tensor::from_data({2, 1}, {3.0f, 4.0f});
  CHECK(matmul(a, b).value() == std::vector<float>{11.0f});

  CHECK_THROWS_AS(matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3})), std::invalid_argument);
}

TEST_CASE("matmul gradient vs finite differences, both precisions") {
  // float path: step 1e-3, tolerance 1e-3
  {
    dlac::Rng rng(41);
    auto a = random_leaf<float>({3, 4}, rng);
    auto b = random_leaf<float>({4, 2}, rng);
    auto eval = [&] { return sum(matmul(a, b)).item(); };
    sum(matmul(a, b)).backward();
    CHECK(oracle::max_rel_err(a.grad(), oracle::central_diff(a, eval, 1e-3f), 1e-3) <= 1e-3);
    CHECK(oracle::max_rel_err(b.grad(), oracle::central_diff(b, eval, 1e-3f), 1e-3) <= 1e-3);
  }
  // double oracle path: tolerance 1e-6
  {
    dlac::Rng rng(42);
    auto a = random_leaf<double>({3, 4}, rng);
    auto b = random_leaf<double>({4, 2}, rng);
    auto eval = [&] { return sum(matmul(a, b)).item(); };
    sum(matmul(a, b)).backward();
    CHECK(oracle::max_rel_err(a.grad(), oracle::central_diff(a, eval, 1e-3), 1e-6) <= 1e-6);
    CHECK(oracle::max_rel_err(b.grad(), oracle::central_diff(b, eval, 1e-3), 1e-6) <= 1e-6);
  }
}

TEST_CASE("conv2d identity and window sum") {
  auto input = Tensor::from_data({1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  auto ident = Tensor::from_data({1, 1, 1, 1}, {1.0f});
  CHECK(conv2d(input, ident, 1, 0).value() == input.value());

  auto ones_in = Tensor::full({1, 3, 3}, 1.0f);
  auto ones_k = Tensor::full({1, 1, 3, 3}, 1.0f);
  auto out = conv2d(ones_in, ones_k, 1, 0);
  CHECK(out.shape() == std::vector<int>{1, 1, 1});
  CHECK(out.value()[0] == 9.0f);
}

TEST_CASE("conv2d rejects kernels larger than the padded input") {
  auto input = Tensor::zeros({1, 3, 3});
  auto k = Tensor::zeros({1, 1, 5, 5});
  CHECK_THROWS_WITH_AS(conv2d(input, k, 1, 0), doctest::Contains("larger than"),
                       std::invalid_argument);
  CHECK_NOTHROW(conv2d(input, k, 1, 1));  // 3 + 2*1 = 5 fits exactly
}

TEST_CASE("conv2d equals the quadruple-loop reference bit-for-bit") {
  dlac::Rng rng(7);
  struct Case {
    int ci, h, w, co, kh, kw, stride, pad;
  };
  const Case cases[] = {
      {2, 5, 5, 3, 3, 3, 1, 0}, {2, 5, 5, 3, 3, 3, 1, 1}, {3, 8, 6, 4, 3, 3, 2, 1},
      {1, 7, 7, 2, 1, 1, 1, 0}, {2, 6, 9, 1, 5, 3, 2, 2}, {4, 4, 4, 4, 3, 3, 2, 1},
  };
  for (const auto& c : cases) {
    auto input = random_leaf<float>({c.ci, c.h, c.w}, rng, false);
    auto k = random_leaf<float>({c.co, c.ci, c.kh, c.kw}, rng, false);
    auto got = conv2d(input, k, c.stride, c.pad);
    auto want = oracle::conv2d_reference(input.value(), c.ci, c.h, c.w, k.value(), c.co, c.kh,
                                         c.kw, c.stride, c.pad);
    CHECK(got.value() == want);  // exact: same accumulation order
  }
}

TEST_CASE("conv2d gradients match finite differences") {
  dlac::Rng rng(11);
  auto input = random_leaf<double>({2, 5, 5}, rng);
  auto k = random_leaf<double>({3, 2, 3, 3}, rng);
  auto eval = [&] { return sum(conv2d(input, k, 1, 1)).item(); };
  sum(conv2d(input, k, 1, 1)).backward();
  CHECK(oracle::max_rel_err(input.grad(), oracle::central_diff(input, eval, 1e-4)) <= 1e-5);
  CHECK(oracle::max_rel_err(k.grad(), oracle::central_diff(k, eval, 1e-4)) <= 1e-5);
}

TEST_CASE("global average pool") {
  CHECK(global_avg_pool(Tensor::full({3, 4, 5}, 2.5f)).value() ==
        std::vector<float>{2.5f, 2.5f, 2.5f});
  CHECK(global_avg_pool(Tensor::from_data({1, 2, 2}, {1, 2, 3, 4})).value() ==
        std::vector<float>{2.5f});

  auto x = Tensor::full({1, 2, 2}, 1.0f, true);
  global_avg_pool(x).backward();
  CHECK(x.grad() == std::vector<float>(4, 0.25f));
}

TEST_CASE("softmax cross entropy") {
  const int d = 7;
  auto uniform = Tensor::zeros({d});
  CHECK(softmax_cross_entropy(uniform, 3).item() == doctest::Approx(std::log(double(d))));

  auto big = Tensor::from_data({2}, {1000.0f, 0.0f});
  const float loss = softmax_cross_entropy(big, 0).item();
  CHECK(std::isfinite(loss));
  CHECK(loss == doctest::Approx(0.0f).epsilon(1e-6));

  CHECK_THROWS_AS(softmax_cross_entropy(uniform, 7), std::invalid_argument);
  CHECK_THROWS_AS(softmax_cross_entropy(uniform, -1), std::invalid_argument);

  dlac::Rng rng(3);
  auto logits = random_leaf<double>({10}, rng);
  auto eval = [&] { return softmax_cross_entropy(logits, 4).item(); };
  softmax_cross_entropy(logits, 4).backward();
  CHECK(oracle::max_rel_err(logits.grad(), oracle::central_diff(logits, eval, 1e-4)) <= 1e-5);
}

TEST_CASE("softmax is a probability vector") {
  dlac::Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + static_cast<int>(rng.below(12));
    std::vector<float> logits(static_cast<std::size_t>(d));
    for (auto& v : logits) v = static_cast<float>(rng.uniform(-30.0, 30.0));
    auto p = dlac::softmax(logits);
    double total = 0.0;
    for (float x : p) {
      CHECK(x >= 0.0f);
      total += x;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("backward: basics, misuse, determinism") {
  auto w = Tensor::from_data({2}, {1.0f, 2.0f}, true);
  auto loss = sum(mul(w, w));
  loss.backward();
  CHECK(w.grad() == std::vector<float>{2.0f, 4.0f});

  // disconnected leaf reads zero gradient
  auto other = Tensor::from_data({3}, {5.0f, 6.0f, 7.0f}, true);
  CHECK(other.grad() == std::vector<float>(3, 0.0f));

  // second backward on the same root is an error
  CHECK_THROWS_WITH_AS(loss.backward(), doctest::Contains("rebuild"), std::logic_error);

  // non-scalar root
  auto vec = mul(w, w);
  CHECK_THROWS_AS(vec.backward(), std::invalid_argument);

  // rebuilding the same graph reproduces gradients bit-for-bit
  dlac::Rng rng(13);
  auto a = random_leaf<float>({4, 4}, rng);
  auto b = random_leaf<float>({4, 4}, rng);
  auto run = [&] {
    auto l = sum(mul(relu(matmul(a, b)), a));
    l.backward();
    auto g = a.grad();
    a.zero_grad();
    b.zero_grad();
    return g;
  };
  CHECK(run() == run());
}

TEST_CASE("sgd step") {
  auto p = Tensor::from_data({1}, {1.0f}, true);
  dlac::Sgd opt({p});
  p.grad_mut()[0] = 0.5f;
  opt.step(0.1f, 0.0f);
  CHECK(p.value()[0] == doctest::Approx(0.95f));

  // zero gradient leaves the parameter unchanged
  p.grad_mut()[0] = 0.0f;
  opt.step(0.1f, 0.0f);
  CHECK(p.value()[0] == doctest::Approx(0.95f));

  // two steps with momentum 0.9 follow the hand recurrence
  auto q = Tensor::from_data({1}, {1.0f}, true);
  dlac::Sgd opt2({q});
  const float lr = 0.1f, m = 0.9f, g1 = 0.5f, g2 = 0.25f;
  q.grad_mut()[0] = g1;
  opt2.step(lr, m);
  const float v1 = g1;
  const float p1 = 1.0f - lr * v1;
  CHECK(q.value()[0] == doctest::Approx(p1));
  q.grad_mut()[0] = g2;
  opt2.step(lr, m);
  const float v2 = m * v1 + g2;
  CHECK(q.value()[0] == doctest::Approx(p1 - lr * v2));

  // stepping without gradients is an error
  auto fresh = Tensor::from_data({2}, {1.0f, 2.0f}, true);
  dlac::Sgd opt3({fresh});
  CHECK_THROWS_WITH_AS(opt3.step(0.1f, 0.0f), doctest::Contains("no gradient"),
                       std::invalid_argument);
}

// Every differentiable op against central finite differences in the 64-bit
// oracle path: step 1e-4, max relative error 1e-5.
TEST_CASE("gradient sweep over every op (64-bit)") {
  dlac::Rng rng(2024);
  const double step = 1e-4, tol = 1e-5;

  auto check_one = [&](DTensor& leaf, auto build) {
    auto eval = [&] { return build().item(); };
    auto loss = build();
    loss.backward();
    const double err = oracle::max_rel_err(leaf.grad(), oracle::central_diff(leaf, eval, step));
    CHECK(err <= tol);
    leaf.zero_grad();
  };

  {
    auto x = random_leaf<double>({3, 4}, rng);
    auto y = random_leaf<double>({3, 4}, rng, false);
    check_one(x, [&] { return sum(add(x, y)); });
    check_one(x, [&] { return sum(mul(x, y)); });
    check_one(x, [&] { return sum(relu(x)); });
    check_one(x, [&] { return sum(scale(x, 3.25)); });
    check_one(x, [&] { return sum(reshape(x, {4, 3})); });
    check_one(x, [&] { return select(x, 5); });
    check_one(x, [&] { return sum(mul(x, x)); });  // both operands the same node
  }
  {
    auto s = random_leaf<double>({1}, rng);
    auto y = random_leaf<double>({2, 3}, rng, false);
    check_one(s, [&] { return sum(add(y, s)); });
    check_one(s, [&] { return sum(mul(y, s)); });
  }
  {
    auto a = random_leaf<double>({4, 3}, rng);
    auto b = random_leaf<double>({3, 5}, rng);
    check_one(a, [&] { return sum(matmul(a, b)); });
    check_one(b, [&] { return sum(relu(matmul(a, b))); });
  }
  {
    auto in = random_leaf<double>({2, 6, 6}, rng);
    auto k = random_leaf<double>({3, 2, 3, 3}, rng);
    check_one(in, [&] { return sum(conv2d(in, k, 1, 1)); });
    check_one(k, [&] { return sum(conv2d(in, k, 1, 1)); });
    check_one(in, [&] { return sum(conv2d(in, k, 2, 1)); });
    check_one(k, [&] { return sum(conv2d(in, k, 2, 1)); });
  }
  {
    auto x = random_leaf<double>({3, 4, 4}, rng);
    auto b = random_leaf<double>({3}, rng);
    check_one(x, [&] { return sum(global_avg_pool(x)); });
    check_one(x, [&] { return sum(add_channel_bias(x, b)); });
    check_one(b, [&] { return sum(add_channel_bias(x, b)); });
  }
  {
    auto logits = random_leaf<double>({8}, rng);
    check_one(logits, [&] { return softmax_cross_entropy(logits, 2); });
  }
}
