#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "helpers.hpp"
#include "uavrelay/error.hpp"
#include "uavrelay/json_io.hpp"
#include "uavrelay/learn.hpp"

using namespace uavrelay;
namespace fs = std::filesystem;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Dataset identity_task(int n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.users = 1;
  for (int i = 0; i < n; ++i) {
    Sample s;
    s.features = Eigen::VectorXd(3);
    for (int j = 0; j < 3; ++j) s.features(j) = uniform(rng, 0.2, 0.8);
    s.labels = s.features;
    d.samples.push_back(s);
  }
  return d;
}

PsoConfig quick_pso() {
  PsoConfig c;
  c.particles = 8;
  c.iterations = 10;
  return c;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "uavrelay_tests";
  fs::create_directories(dir);
  const auto p = dir / name;
  fs::remove(p);
  return p;
}

}  // namespace

TEST_CASE("features: length and scaling") {
  CHECK(feature_length(1, 4, 2) == 14);
  CMatrix h = CMatrix::Zero(1, 4);
  h(0, 0) = 2.0;
  h(0, 2) = -1.0;
  CMatrix b = CMatrix::Zero(2, 1);
  b(0, 0) = cdouble(0.5, 0.25);
  b(1, 0) = 0.1;
  const auto z = build_features(h, b);
  REQUIRE(z.size() == 14);
  CHECK(z(0) == doctest::Approx(1.0));
  CHECK(z(2) == doctest::Approx(-0.5));
  CHECK(z.head(8).cwiseAbs().maxCoeff() == doctest::Approx(1.0));
  CHECK(z(8) == doctest::Approx(1.0));  // precoder block scaled by its max
  CHECK(z(12) == doctest::Approx(1.0));  // one user: gain over max gain
  CHECK(z(13) == doctest::Approx(1.0));
}

TEST_CASE("features: every entry in [-1, 1] on real realizations") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const RealizationFactory f(Scenario::desk(), seed);
    const auto z = realization_features(f);
    CHECK(z.size() == feature_length(4, 16, f.rf_at({50, 50}).ut.f_ut.cols()));
    CHECK(z.cwiseAbs().maxCoeff() <= 1.0 + 1e-15);
  }
}

TEST_CASE("features: zero precoder gain is rejected") {
  try {
    build_features(CMatrix::Ones(2, 4), CMatrix::Zero(3, 2));
    FAIL("expected DegenerateInput");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateInput);
  }
}

TEST_CASE("forward: zero model gives one half everywhere") {
  auto m = make_mlp({5, 4, 3}, 1);
  for (auto& w : m.weights) w.setZero();
  const Eigen::VectorXd out = forward(m, Eigen::VectorXd(Eigen::VectorXd::Constant(5, 3.0)));
  for (int i = 0; i < 3; ++i) CHECK(out(i) == 0.5);
}

TEST_CASE("forward: hand-computed 2-2-1 network") {
  auto m = make_mlp({2, 2, 1}, 1);
  m.weights[0] << 1.0, -2.0, 0.5, 0.5;
  m.biases[0] << 0.1, -3.0;
  m.weights[1] << 2.0, -1.0;
  m.biases[1] << -0.3;
  Eigen::VectorXd x(2);
  x << 0.7, 0.2;
  const double h0 = std::max(0.0, 0.7 - 0.4 + 0.1);        // 0.4
  const double h1 = std::max(0.0, 0.35 + 0.1 - 3.0);       // clamps to 0
  const double expect = sigmoid(2.0 * h0 - 1.0 * h1 - 0.3);
  CHECK(forward(m, x)(0) == doctest::Approx(expect).epsilon(1e-15));
  CHECK_THROWS_AS(forward(m, Eigen::VectorXd(Eigen::VectorXd::Zero(3))), Error);
}

TEST_CASE("forward: outputs stay inside (0, 1)") {
  const auto m = make_mlp({6, 8, 8, 3}, 4);
  Rng rng(4);
  Eigen::MatrixXd x(6, 50);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = uniform(rng, -50.0, 50.0);
  const auto y = forward(m, x);
  CHECK(y.minCoeff() > 0.0);
  CHECK(y.maxCoeff() < 1.0);
}

TEST_CASE("loss: worked values") {
  Eigen::MatrixXd y(3, 1), p(3, 1);
  y << 0.5, 0.2, 0.9;
  p = y;
  CHECK(loss(p, y, LossMode::MSE) == 0.0);
  CHECK(loss(p, y, LossMode::MAE) == 0.0);
  p(0, 0) = 1.0;
  CHECK(loss(p, y, LossMode::MSE) == doctest::Approx(0.25));
  CHECK(loss(p, y, LossMode::MAE) == doctest::Approx(0.5));
  Rng rng(1);
  Eigen::MatrixXd a(4, 7), b(4, 7);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    a(i) = uniform01(rng);
    b(i) = uniform01(rng);
  }
  CHECK(loss(a, b, LossMode::MAE) >= 0.0);
}

TEST_CASE("gradients agree with central differences") {
  Rng rng(9);
  const auto m = make_mlp({4, 6, 5, 3}, 17);
  Eigen::MatrixXd x(4, 8), y(3, 8);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = uniform(rng, -1.0, 1.0);
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = uniform01(rng);
  for (auto mode : {LossMode::MSE, LossMode::MAE}) {
    const auto err = gradient_check(m, x, y, mode, 1e-3, 20, 5);
    REQUIRE(err.size() == 3);
    for (double e : err) CHECK(e < 1e-5);
  }
}

TEST_CASE("train: zero learning rate leaves the weights alone") {
  auto m = make_mlp({3, 5, 3}, 2);
  const auto before = m.weights;
  TrainConfig c;
  c.lr = 0.0;
  c.epochs = 3;
  c.batch_size = 8;
  train(m, identity_task(40, 1), c);
  for (std::size_t l = 0; l < before.size(); ++l) CHECK(m.weights[l] == before[l]);
}

TEST_CASE("train: identity task converges") {
  auto m = make_mlp({3, 16, 3}, 3);
  TrainConfig c;
  c.epochs = 500;
  c.batch_size = 16;
  c.lr = 3e-3;
  c.l2 = 0.0;
  const auto rep = train(m, identity_task(64, 2), c);
  CHECK(rep.train_loss.back() < 1e-3);
  CHECK(rep.val_mse.size() == 500);
}

TEST_CASE("train: one repeated batch, loss falls over the first steps") {
  auto m = make_mlp({3, 8, 3}, 5);
  const auto d = identity_task(10, 3);
  TrainConfig c;
  c.epochs = 1;
  c.batch_size = 8;
  c.l2 = 0.0;
  c.train_fraction = 1.0;
  const auto x = d.feature_matrix(0, 8);
  const auto y = d.label_matrix(0, 8);
  Dataset batch;
  batch.users = 1;
  batch.samples.assign(d.samples.begin(), d.samples.begin() + 8);
  double last = objective(m, x, y, LossMode::MSE, 0.0);
  for (int i = 0; i < 10; ++i) {
    train(m, batch, c);
    const double now = objective(m, x, y, LossMode::MSE, 0.0);
    CHECK(now <= last + 1e-6);
    last = now;
  }
}

TEST_CASE("train: the L2 penalty shrinks weights") {
  const auto d = identity_task(64, 4);
  auto plain = make_mlp({3, 16, 3}, 6);
  auto decayed = plain;
  TrainConfig c;
  c.epochs = 40;
  c.batch_size = 16;
  c.l2 = 0.0;
  train(plain, d, c);
  c.l2 = 1e-2;
  train(decayed, d, c);
  double np = 0.0, nd = 0.0;
  for (int l = 0; l < plain.layers(); ++l) {
    np += plain.weights[l].squaredNorm();
    nd += decayed.weights[l].squaredNorm();
  }
  CHECK(nd < np);
}

TEST_CASE("train: argument errors") {
  auto m = make_mlp({3, 4, 3}, 1);
  TrainConfig c;
  c.batch_size = 100;
  CHECK_THROWS_AS(train(m, identity_task(20, 1), c), Error);
  CHECK_THROWS_AS(train(m, Dataset{}, TrainConfig{}), Error);
}

TEST_CASE("predict_and_denormalize: equal outputs give equal power") {
  Rng rng(3);
  const CMatrix b = testing::random_cmatrix(5, 3, rng);
  Eigen::VectorXd out(5);
  out << 0.7, 0.7, 0.7, 0.5, 1.2;
  const auto [pa, loc] = predict_and_denormalize(out, b, 10.0, DeploymentBox{});
  const auto eq = equal_power(b, 10.0);
  for (int k = 0; k < 3; ++k) CHECK(pa.p[k] == doctest::Approx(eq.p[k]).epsilon(1e-12));
  CHECK(radiated_power(pa, b) == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(loc.x == 50.0);
  CHECK(loc.y == 100.0);
}

TEST_CASE("model checkpoint round trip") {
  auto m = make_mlp({3, 4, 3}, 8);
  TrainConfig c;
  c.epochs = 2;
  c.batch_size = 4;
  train(m, identity_task(12, 1), c);
  const auto back = model_from_json(model_to_json(m));
  CHECK(back.sizes == m.sizes);
  CHECK(back.step == m.step);
  CHECK(m.step > 0);
  for (int l = 0; l < m.layers(); ++l) {
    CHECK(back.weights[l] == m.weights[l]);
    CHECK(back.biases[l] == m.biases[l]);
    CHECK(back.m_w[l] == m.m_w[l]);
    CHECK(back.v_b[l] == m.v_b[l]);
  }
  CHECK_THROWS_AS(model_from_json("{\"format\": \"other\"}"), Error);
}

TEST_CASE("dataset: one sample round-trips to the joint solution") {
  const Scenario s = Scenario::desk();
  const auto d = generate_dataset(1, s, quick_pso(), 5);
  REQUIRE(d.samples.size() == 1);
  const auto& smp = d.samples[0];
  CHECK(smp.seed == derive_seed(5, {0}));
  const RealizationFactory f(s, smp.seed);
  const auto sol = solve_joint(f, reseeded(quick_pso(), smp.seed));
  const int K = f.users();
  const auto loc = f.box().from_unit(smp.labels(K), smp.labels(K + 1));
  CHECK(loc.x == doctest::Approx(sol.location.x).epsilon(1e-12));
  CHECK(loc.y == doctest::Approx(sol.location.y).epsilon(1e-12));
  const double p_max = *std::max_element(sol.alloc.p.begin(), sol.alloc.p.end());
  for (int k = 0; k < K; ++k) CHECK(smp.labels(k) * p_max == doctest::Approx(sol.alloc.p[k]).epsilon(1e-12));
  CHECK(smp.labels.minCoeff() >= 0.0);
  CHECK(smp.labels.maxCoeff() <= 1.0);
}

TEST_CASE("dataset: files are deterministic, resumable and split 80/20") {
  const Scenario s = Scenario::desk();
  const auto a = scratch("a.jsonl");
  const auto b = scratch("b.jsonl");
  generate_dataset(100, s, quick_pso(), 3, a.string());
  DatasetOptions opts;
  opts.workers = 2;
  opts.chunk = 16;
  generate_dataset(40, s, quick_pso(), 3, b.string(), opts);
  const auto resumed = generate_dataset(100, s, quick_pso(), 3, b.string(), opts);
  CHECK(io::read_file(a.string()) == io::read_file(b.string()));
  CHECK(resumed.samples.size() == 100);
  const auto loaded = load_dataset(a.string());
  CHECK(loaded.samples.size() == 100);
  CHECK(loaded.split_index() == 80);
  CHECK(loaded.samples.size() - loaded.split_index() == 20);
  CHECK_THROWS_AS(generate_dataset(100, s, quick_pso(), 4, a.string()), Error);
}
