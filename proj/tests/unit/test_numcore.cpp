#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <doctest.h>

#include "aapl/error.hpp"
#include "aapl/numcore/gradcheck.hpp"
#include "aapl/numcore/ops.hpp"
#include "aapl/numcore/optim.hpp"
#include "aapl/numcore/tape.hpp"
#include "aapl/numcore/tensor.hpp"

using namespace aapl;
using namespace aapl::numcore;

namespace {

std::vector<double> normal(std::size_t n, std::mt19937_64& rng, double sigma = 1.0) {
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

}  // namespace

TEST_CASE("tensor construction enforces shape and size") {
  CHECK_THROWS_AS(Tensor({2, 3}, std::vector<double>(5)), ShapeError);
  CHECK_THROWS_AS(Tensor::zeros({0, 3}), ShapeError);
  auto t = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(t.numel() == 6);
  CHECK(t.rank() == 2);
  CHECK(t[4] == 5.0);
  CHECK(Tensor::scalar(2.5).item() == 2.5);
  CHECK_THROWS(t.item());
}

TEST_CASE("clone and detach copy storage") {
  auto t = Tensor::vector({1, 2}, true);
  auto c = t.clone();
  auto d = t.detach();
  CHECK_FALSE(c.same_storage(t));
  CHECK(c.requires_grad());
  CHECK_FALSE(d.requires_grad());
  c.mutable_data()[0] = 9;
  CHECK(t[0] == 1.0);
}

TEST_CASE("forward ops on small inputs") {
  CHECK(ops::cosine_similarity(Tensor::vector({1, 0}), Tensor::vector({0, 1})).item() == 0.0);
  auto v = Tensor::vector({0.3, -1.2, 4.0});
  CHECK(ops::euclidean_distance(v, v).item() == 0.0);
  auto s = ops::softmax(Tensor::vector({0, 0, 0}));
  for (double p : s.data()) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  auto a = Tensor::matrix(2, 2, {1, 2, 3, 4});
  auto b = Tensor::matrix(2, 2, {5, 6, 7, 8});
  auto m = ops::matmul(a, b);
  CHECK(std::vector<double>(m.data().begin(), m.data().end()) == std::vector<double>{19, 22, 43, 50});
  auto mv = ops::matmul(a, Tensor::vector({1, -1}));
  CHECK(std::vector<double>(mv.data().begin(), mv.data().end()) == std::vector<double>{-1, -1});

  CHECK(ops::l2_norm(Tensor::vector({3, 4})).item() == 5.0);
  CHECK(ops::mean(Tensor::vector({1, 2, 3, 6})).item() == 3.0);
  CHECK(ops::sum(a).item() == 10.0);
  auto r = ops::relu(Tensor::vector({-1, 0, 2}));
  CHECK(std::vector<double>(r.data().begin(), r.data().end()) == std::vector<double>{0, 0, 2});
  std::vector<Tensor> parts{Tensor::vector({1}), Tensor::vector({2, 3})};
  auto cat = ops::concat(parts);
  CHECK(cat.numel() == 3);
  CHECK(cat[2] == 3.0);
  auto sl = ops::slice(Tensor::vector({1, 2, 3, 4}), 1, 3);
  CHECK(sl.shape() == Shape{2});
  CHECK(sl[0] == 2.0);
  auto rows = ops::slice(a, 1, 2);
  CHECK(rows.shape() == Shape{1, 2});
  CHECK(rows[1] == 4.0);
}

TEST_CASE("shape mismatch names the op and both shapes") {
  try {
    ops::add(Tensor::vector({1, 2}), Tensor::vector({1, 2, 3}));
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("add") != std::string::npos);
    CHECK(msg.find("[2]") != std::string::npos);
    CHECK(msg.find("[3]") != std::string::npos);
  }
  CHECK_THROWS_AS(ops::matmul(Tensor::matrix(2, 3, std::vector<double>(6)), Tensor::vector({1, 2})),
                  ShapeError);
  CHECK_THROWS_AS(ops::slice(Tensor::vector({1, 2}), 1, 3), ShapeError);
}

TEST_CASE("non-finite results are numeric errors") {
  CHECK_THROWS_AS(ops::log(Tensor::vector({1.0, 0.0})), NumericError);
  CHECK_THROWS_AS(ops::scale(Tensor::vector({1e308}), 10.0), NumericError);
  CHECK_THROWS_AS(ops::cosine_similarity(Tensor::vector({0, 0}), Tensor::vector({1, 0})), NumericError);
}

TEST_CASE("backward of x*x at 3 is 6") {
  auto x = Tensor::scalar(3.0, true);
  Tape tape;
  auto y = ops::mul(x, x);
  tape.backward(y);
  CHECK(x.grad()[0] == 6.0);
}

TEST_CASE("gradient of mean is 1/n per element") {
  auto x = Tensor::vector({1, 2, 3, 4, 5}, true);
  Tape tape;
  tape.backward(ops::mean(x));
  for (double g : x.grad()) CHECK(g == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("gradients accumulate across reuse") {
  auto x = Tensor::vector({1.5, -2.0}, true);
  Tape tape;
  auto y = ops::add(ops::sum(ops::mul(x, x)), ops::sum(ops::scale(x, 3.0)));
  tape.backward(y);
  CHECK(x.grad()[0] == doctest::Approx(2 * 1.5 + 3));
  CHECK(x.grad()[1] == doctest::Approx(2 * -2.0 + 3));
}

TEST_CASE("tape rejects stale and malformed backward") {
  auto x = Tensor::vector({1, 2}, true);
  {
    Tape tape;
    auto y = ops::sum(ops::mul(x, x));
    tape.backward(y);
    CHECK(tape.consumed());
    CHECK_THROWS_AS(tape.backward(y), StateError);
  }
  {
    Tape tape;
    auto y = ops::mul(x, x);
    CHECK_THROWS_AS(tape.backward(y), ShapeError);
  }
  {
    Tape tape;
    CHECK_THROWS(tape.backward(Tensor::scalar(1.0)));
  }
}

TEST_CASE("no-grad guard suspends recording") {
  auto x = Tensor::vector({1, 2}, true);
  Tape tape;
  {
    NoGradGuard guard;
    auto y = ops::sum(x);
    CHECK_FALSE(y.requires_grad());
  }
  CHECK(tape.size() == 0);
  auto z = ops::sum(x);
  CHECK(z.requires_grad());
  CHECK(tape.size() == 1);
}

TEST_CASE("two-layer relu net passes finite differences for 100 seeds") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    auto w1 = Tensor::matrix(6, 5, normal(30, rng), true);
    auto w2 = Tensor::matrix(3, 6, normal(18, rng), true);
    auto x = Tensor::vector(normal(5, rng));
    auto loss = [&] { return ops::sum(ops::tanh(ops::matmul(w2, ops::relu(ops::matmul(w1, x))))); };
    auto r = finite_difference_check(loss, {w1, w2});
    if (r.near_kink) continue;
    ++checked;
    CHECK(r.max_relative_error < 1e-4);
  }
  CHECK(checked > 50);
}

TEST_CASE("finite differences on a sum of squares are exact to 1e-8") {
  std::mt19937_64 rng(5);
  auto p = Tensor::vector(normal(10, rng), true);
  auto r = finite_difference_check([&] { return ops::sum(ops::mul(p, p)); }, {p});
  CHECK(r.max_relative_error < 1e-8);
  CHECK(r.coordinates == 10);
  CHECK_FALSE(r.near_kink);
}

TEST_CASE("finite-difference check flags hinge kinks") {
  auto p = Tensor::scalar(0.0, true);
  auto r = finite_difference_check([&] { return ops::max0(p); }, {p});
  CHECK(r.near_kink);
  auto q = Tensor::vector({0.5, 1e-6}, true);
  CHECK(finite_difference_check([&] { return ops::sum(ops::relu(q)); }, {q}).near_kink);
}

TEST_CASE("finite-difference check rejects non-deterministic functions") {
  auto p = Tensor::scalar(1.0, true);
  double drift = 0.0;
  auto f = [&] {
    drift += 1.0;
    return ops::add_scalar(p, drift);
  };
  CHECK_THROWS_AS(finite_difference_check(f, {p}), StateError);
  CHECK_THROWS_AS(finite_difference_check([&] { return ops::sum(p); }, {p}, 0.0), ConfigError);
}

TEST_CASE("backward is linear") {
  std::mt19937_64 rng(11);
  auto p = Tensor::vector(normal(7, rng), true);
  auto f = [&] { return ops::sum(ops::tanh(p)); };
  auto g = [&] { return ops::l2_norm(p); };
  auto grad_of = [&](auto fn) {
    p.clear_grad();
    Tape tape;
    tape.backward(fn());
    return std::vector<double>(p.grad().begin(), p.grad().end());
  };
  const double a = 0.7, b = -1.3;
  auto gf = grad_of(f);
  auto gg = grad_of(g);
  auto gc = grad_of([&] { return ops::add(ops::scale(f(), a), ops::scale(g(), b)); });
  for (std::size_t i = 0; i < gc.size(); ++i) CHECK(std::abs(gc[i] - (a * gf[i] + b * gg[i])) < 1e-10);
}

TEST_CASE("softmax and cosine stay in range for random inputs") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    auto v = Tensor::vector(normal(9, rng, 20.0));
    auto s = ops::softmax(v);
    double total = 0.0;
    for (double p : s.data()) {
      CHECK(p > 0.0);
      total += p;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
    auto c = ops::cosine_similarity(v, Tensor::vector(normal(9, rng))).item();
    CHECK(c >= -1.0 - 1e-12);
    CHECK(c <= 1.0 + 1e-12);
  }
}

TEST_CASE("log_softmax matches log of softmax") {
  auto v = Tensor::vector({0.5, -3.0, 2.0, 1.0});
  auto ls = ops::log_softmax(v);
  auto s = ops::softmax(v);
  for (std::size_t i = 0; i < 4; ++i) CHECK(ls[i] == doctest::Approx(std::log(s[i])).epsilon(1e-14));
}

TEST_CASE("every op's backward matches finite differences") {
  std::mt19937_64 rng(21);
  auto a = Tensor::vector(normal(4, rng), true);
  auto b = Tensor::vector(normal(4, rng), true);
  auto m = Tensor::matrix(3, 4, normal(12, rng), true);
  auto weights = Tensor::vector(normal(3, rng));
  const std::vector<std::pair<const char*, std::function<Tensor()>>> cases = {
      {"sub", [&] { return ops::sum(ops::mul(ops::sub(a, b), ops::sub(a, b))); }},
      {"dot", [&] { return ops::dot(a, b); }},
      {"l2", [&] { return ops::l2_norm(a); }},
      {"dist", [&] { return ops::euclidean_distance(a, b); }},
      {"cos", [&] { return ops::cosine_similarity(a, b); }},
      {"softmax", [&] { return ops::dot(ops::softmax(ops::matmul(m, a)), weights); }},
      {"log_softmax", [&] { return ops::pick(ops::log_softmax(ops::matmul(m, b)), 1); }},
      {"log", [&] { return ops::sum(ops::log(ops::add_scalar(ops::mul(a, a), 1.0))); }},
      {"mean_rows", [&] { return ops::dot(ops::mean_rows(m), a); }},
      {"stack", [&] {
         std::vector<Tensor> rows{a, b};
         return ops::sum(ops::tanh(ops::matmul(ops::stack(rows), ops::reshape(ops::slice(m, 0, 1), {4}))));
       }},
      {"concat", [&] {
         std::vector<Tensor> parts{a, b};
         return ops::l2_norm(ops::concat(parts));
       }},
  };
  for (const auto& [name, fn] : cases) {
    CAPTURE(name);
    auto r = finite_difference_check(fn, {a, b, m});
    CHECK(r.max_relative_error < 1e-6);
  }
}

TEST_CASE("sgd step follows the momentum recurrence") {
  SUBCASE("single step") {
    auto p = Tensor::scalar(0.0, true);
    SgdMomentum opt({p}, 1.0, 0.0);
    p.mutable_grad()[0] = 2.0;
    opt.step();
    CHECK(p.item() == -2.0);
    CHECK(p.grad()[0] == 0.0);
  }
  SUBCASE("two steps with constant gradient") {
    auto p = Tensor::scalar(0.0, true);
    SgdMomentum opt({p}, 0.1, 0.9);
    const double g = 1.5;
    p.mutable_grad()[0] = g;
    opt.step();
    p.mutable_grad()[0] = g;
    opt.step();
    CHECK(opt.velocities()[0][0] == doctest::Approx(1.9 * g).epsilon(1e-15));
  }
  SUBCASE("missing gradient is an error") {
    auto p = Tensor::scalar(0.0, true);
    SgdMomentum opt({p}, 0.1);
    CHECK_THROWS_AS(opt.step(), StateError);
  }
}

TEST_CASE("cosine schedule closed form") {
  auto p = Tensor::scalar(0.0, true);
  SgdMomentum opt({p}, 0.002, 0.9, LrSchedule::kCosine, 100);
  CHECK(opt.lr_at(0) == doctest::Approx(0.002));
  CHECK(opt.lr_at(50) == doctest::Approx(0.5 * 0.002).epsilon(1e-14));
  CHECK(opt.lr_at(100) == doctest::Approx(0.0));
  for (std::size_t t = 0; t <= 100; t += 7) {
    CHECK(opt.lr_at(t) == doctest::Approx(0.002 * 0.5 * (1 + std::cos(std::numbers::pi * t / 100.0))));
  }
}

TEST_CASE("identical op sequences give identical buffers") {
  auto run = [] {
    std::mt19937_64 rng(99);
    auto w = Tensor::matrix(4, 4, normal(16, rng), true);
    auto x = Tensor::vector(normal(4, rng));
    Tape tape;
    tape.backward(ops::l2_norm(ops::relu(ops::matmul(w, x))));
    return std::vector<double>(w.grad().begin(), w.grad().end());
  };
  CHECK(run() == run());
}
