#include <doctest.h>

#include <cmath>
#include <random>

#include "core/optimizer.hpp"
#include "core/tensor.hpp"
#include "oracles.hpp"

using namespace amen;
using ad::make_const;
using ad::make_param;
using ad::Tape;
using ad::TensorRef;

namespace {

TensorRef random_param(std::vector<int> shape, std::mt19937_64& rng) {
  auto t = make_param(std::move(shape));
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& x : t->v) x = dist(rng);
  return t;
}

}  // namespace

TEST_CASE("matmul identity and hand arithmetic") {
  Tape tape;
  auto eye = make_const({2, 2}, {1, 0, 0, 1});
  auto m = make_const({2, 2}, {3.5, -1, 2, 7});
  auto prod = tape.matmul(eye, m);
  for (int i = 0; i < 4; ++i) CHECK(prod->v[i] == m->v[i]);

  auto row = make_const({1, 2}, {1, 2});
  auto col = make_const({2, 1}, {3, 4});
  CHECK(tape.matmul(row, col)->v[0] == doctest::Approx(11.0).epsilon(1e-15));
}

TEST_CASE("matmul shape mismatch names both shapes") {
  Tape tape;
  auto a = make_const({2, 3}, std::vector<double>(6, 0.0));
  auto b = make_const({2, 2}, std::vector<double>(4, 0.0));
  try {
    tape.matmul(a, b);
    FAIL("expected dimension error");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
    CHECK(msg.find("[2x2]") != std::string::npos);
  }
}

TEST_CASE("matmul gradient matches central finite differences") {
  std::mt19937_64 rng(11);
  auto a = random_param({3, 4}, rng);
  auto b = random_param({4, 2}, rng);
  auto run = [&] {
    Tape tape;
    return tape.sum(tape.matmul(a, b));
  };
  Tape tape;
  a->zero_grad();
  b->zero_grad();
  tape.backward(tape.sum(tape.matmul(a, b)));
  const TensorRef params[] = {a, b};
  CHECK(oracle::grad_check(params, [&] { return run()->v[0]; }) < 1e-6);
}

TEST_CASE("softmax symmetry, stability and normalization") {
  Tape tape;
  auto flat = tape.softmax(make_const({3}, {0, 0, 0}), 0);
  for (int i = 0; i < 3; ++i) CHECK(flat->v[i] == doctest::Approx(1.0 / 3).epsilon(1e-15));

  auto extreme = tape.softmax(make_const({2}, {1000, 0}), 0);
  CHECK(std::fabs(extreme->v[0] - 1.0) < 1e-12);
  CHECK(std::fabs(extreme->v[1] - 0.0) < 1e-12);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-50.0, 50.0);
  for (int trial = 0; trial < 25; ++trial) {
    auto x = make_const({4, 5}, [&] {
      std::vector<double> v(20);
      for (auto& e : v) e = dist(rng);
      return v;
    }());
    auto y = tape.softmax(x, 1);
    for (int r = 0; r < 4; ++r) {
      double s = 0.0;
      for (int c = 0; c < 5; ++c) s += y->at(r, c);
      CHECK(std::fabs(s - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("softmax gradient matches finite differences") {
  std::mt19937_64 rng(5);
  auto x = random_param({2, 4}, rng);
  auto weight = make_const({2, 4}, {0.3, -1.2, 0.7, 2.0, -0.5, 0.1, 1.4, -0.9});
  auto run = [&] {
    Tape tape;
    return tape.sum(tape.mul(tape.softmax(x, 1), weight))->v[0];
  };
  Tape tape;
  x->zero_grad();
  tape.backward(tape.sum(tape.mul(tape.softmax(x, 1), weight)));
  const TensorRef params[] = {x};
  CHECK(oracle::grad_check(params, run) < 1e-6);
}

TEST_CASE("elementwise suite basics") {
  Tape tape;
  CHECK(tape.sigmoid(make_const({1}, {0}))->v[0] == doctest::Approx(0.5).epsilon(1e-15));

  auto a = make_const({2, 3}, std::vector<double>(6, 1.0));
  auto b = make_const({2, 5}, std::vector<double>(10, 2.0));
  const TensorRef parts[] = {a, b};
  auto cat = tape.concat(parts, -1);
  CHECK(cat->shape == std::vector<int>{2, 8});
  CHECK(cat->at(1, 2) == 1.0);
  CHECK(cat->at(1, 3) == 2.0);

  CHECK_THROWS_AS(tape.log(make_const({1}, {0.0})), std::domain_error);
  CHECK_THROWS_AS(tape.log(make_const({1}, {-1.0})), std::domain_error);
  CHECK(tape.abs(make_const({2}, {-3, 2}))->v[0] == 3.0);
  CHECK(tape.relu(make_const({2}, {-3, 2}))->v[0] == 0.0);
  CHECK(tape.clamp(make_const({1}, {5.0}), 0.0, 1.0)->v[0] == 1.0);
}

TEST_CASE("composite sigmoid(a*b + c) gradient matches finite differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    auto a = random_param({2, 2}, rng);
    auto b = random_param({2, 2}, rng);
    auto c = random_param({2, 2}, rng);
    auto run = [&] {
      Tape tape;
      return tape.sum(tape.sigmoid(tape.add(tape.mul(a, b), c)))->v[0];
    };
    a->zero_grad();
    b->zero_grad();
    c->zero_grad();
    Tape tape;
    tape.backward(tape.sum(tape.sigmoid(tape.add(tape.mul(a, b), c))));
    const TensorRef params[] = {a, b, c};
    CHECK(oracle::grad_check(params, run) < 1e-6);
  }
}

TEST_CASE("gradient accumulation honors graph participation") {
  std::mt19937_64 rng(17);
  auto used = random_param({2, 2}, rng);
  auto untouched = random_param({2, 2}, rng);
  untouched->zero_grad();
  used->zero_grad();
  Tape tape;
  tape.backward(tape.sum(tape.mul(used, used)));
  for (int i = 0; i < 4; ++i) {
    CHECK(used->g[i] == doctest::Approx(2.0 * used->v[i]).epsilon(1e-12));
    CHECK(untouched->g[i] == 0.0);
  }
}

TEST_CASE("adagrad zero gradient leaves parameters unchanged") {
  auto p = make_param({3});
  p->v = {1, 2, 3};
  p->zero_grad();
  ad::AdaGrad opt({0.1, 1e-8, 1.0});
  const TensorRef params[] = {p};
  opt.step(params);
  CHECK(p->v == std::vector<double>{1, 2, 3});
}

TEST_CASE("adagrad scalar recurrence and shrinking step size") {
  auto p = make_param({1});
  p->v = {0.0};
  ad::AdaGrad opt({0.1, 0.0, 1.0});
  const TensorRef params[] = {p};

  p->g = {3.0};
  opt.step(params);
  CHECK(p->v[0] == doctest::Approx(-0.1).epsilon(1e-12));
  p->g = {4.0};
  opt.step(params);
  CHECK(p->v[0] == doctest::Approx(-0.18).epsilon(1e-12));

  // constant gradient: per-step displacement never grows
  auto q = make_param({1});
  ad::AdaGrad opt2({0.1, 0.0, 1.0});
  const TensorRef params2[] = {q};
  double prev_step = 1e9;
  for (int i = 0; i < 10; ++i) {
    const double before = q->v[0];
    q->g = {2.5};
    opt2.step(params2);
    const double step = std::fabs(q->v[0] - before);
    CHECK(step <= prev_step + 1e-15);
    prev_step = step;
  }
}

TEST_CASE("random composite gradients match finite differences across seeds") {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    std::mt19937_64 rng(seed);
    auto a = random_param({2, 3}, rng);
    auto b = random_param({3, 2}, rng);
    auto c = random_param({2, 2}, rng);
    auto build = [&](Tape& tape) {
      auto z = tape.matmul(a, b);
      auto act = tape.relu(tape.add(z, c));
      auto soft = tape.softmax(tape.matmul_nt(act, c), 1);
      return tape.sum(tape.mul(soft, tape.sigmoid(z)));
    };
    a->zero_grad();
    b->zero_grad();
    c->zero_grad();
    Tape tape;
    tape.backward(build(tape));
    const TensorRef params[] = {a, b, c};
    const double rel = oracle::grad_check(params, [&] {
      Tape t2;
      return build(t2)->v[0];
    });
    CHECK(rel < 1e-4);
  }
}
