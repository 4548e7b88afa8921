#include "uavrelay/learn.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "uavrelay/error.hpp"
#include "uavrelay/json_io.hpp"

namespace uavrelay {

int feature_length(int users, int n_t, int n_rfu) { return (2 * n_t + 2 * n_rfu + 2) * users; }

Eigen::VectorXd build_features(const CMatrix& h2, const CMatrix& b_ut) {
  const auto K = h2.rows();
  const auto n_t = h2.cols();
  const auto n_rfu = b_ut.rows();
  if (b_ut.cols() != K) throw Error(ErrorKind::ShapeMismatch, "precoder columns must match channel rows");

  Eigen::VectorXd gains(K);
  for (Eigen::Index k = 0; k < K; ++k) gains(k) = b_ut.col(k).squaredNorm();
  if (!(gains.minCoeff() > 0.0)) throw Error(ErrorKind::DegenerateInput, "a precoder column has zero gain");

  const double h_max = std::max(h2.real().cwiseAbs().maxCoeff(), h2.imag().cwiseAbs().maxCoeff());
  const double b_max = std::max(b_ut.real().cwiseAbs().maxCoeff(), b_ut.imag().cwiseAbs().maxCoeff());
  const double w1 = h_max > 0.0 ? 1.0 / h_max : 0.0;
  const double w2 = 1.0 / b_max;
  const double w3 = 1.0 / gains.maxCoeff();
  const double w4 = gains.minCoeff();

  Eigen::VectorXd z(feature_length(static_cast<int>(K), static_cast<int>(n_t), static_cast<int>(n_rfu)));
  Eigen::Index i = 0;
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index c = 0; c < n_t; ++c) z(i++) = w1 * h2(k, c).real();
    for (Eigen::Index c = 0; c < n_t; ++c) z(i++) = w1 * h2(k, c).imag();
  }
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index r = 0; r < n_rfu; ++r) z(i++) = w2 * b_ut(r, k).real();
    for (Eigen::Index r = 0; r < n_rfu; ++r) z(i++) = w2 * b_ut(r, k).imag();
  }
  for (Eigen::Index k = 0; k < K; ++k) z(i++) = w3 * gains(k);
  for (Eigen::Index k = 0; k < K; ++k) z(i++) = w4 / gains(k);
  return z;
}

Eigen::VectorXd realization_features(const RealizationFactory& f) {
  const auto xy = f.default_location();
  const auto ch = f.channels_at(xy);
  const auto st = f.stages_at(xy);
  return build_features(ch.h2, st.b_ut);
}

MlpModel make_mlp(const std::vector<int>& sizes, std::uint64_t seed) {
  if (sizes.size() < 2) throw Error(ErrorKind::InvalidArgument, "network needs an input and an output layer");
  for (int s : sizes) {
    if (s < 1) throw Error(ErrorKind::InvalidArgument, "layer widths must be >= 1");
  }
  MlpModel m;
  m.sizes = sizes;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
    Eigen::MatrixXd w(sizes[l + 1], sizes[l]);
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = uniform(rng, -bound, bound);
    }
    m.weights.push_back(w);
    m.biases.push_back(Eigen::VectorXd::Zero(sizes[l + 1]));
    m.m_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    m.v_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    m.m_b.push_back(Eigen::VectorXd::Zero(sizes[l + 1]));
    m.v_b.push_back(Eigen::VectorXd::Zero(sizes[l + 1]));
  }
  return m;
}

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& a) {
  return a.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

// Post-activation outputs of every layer, input first.
std::vector<Eigen::MatrixXd> forward_all(const MlpModel& m, const Eigen::MatrixXd& x) {
  if (x.rows() != m.inputs()) {
    throw Error(ErrorKind::ShapeMismatch,
                "feature length " + std::to_string(x.rows()) + " != model input " + std::to_string(m.inputs()));
  }
  std::vector<Eigen::MatrixXd> z{x};
  for (int l = 0; l < m.layers(); ++l) {
    Eigen::MatrixXd a = (m.weights[static_cast<std::size_t>(l)] * z.back()).colwise() +
                        m.biases[static_cast<std::size_t>(l)];
    if (l + 1 < m.layers()) {
      z.push_back(a.cwiseMax(0.0));
    } else {
      z.push_back(sigmoid(a));
    }
  }
  return z;
}

double l2_penalty(const MlpModel& m) {
  double acc = 0.0;
  for (const auto& w : m.weights) acc += w.squaredNorm();
  return acc;
}

}  // namespace

Eigen::MatrixXd forward(const MlpModel& m, const Eigen::MatrixXd& x) { return forward_all(m, x).back(); }

Eigen::VectorXd forward(const MlpModel& m, const Eigen::VectorXd& x) {
  return forward(m, Eigen::MatrixXd(x)).col(0);
}

double loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& labels, LossMode mode) {
  if (pred.rows() != labels.rows() || pred.cols() != labels.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "predictions and labels differ in shape");
  }
  if (pred.rows() < 3) throw Error(ErrorKind::ShapeMismatch, "labels need K >= 1 powers and two location slots");
  const auto K = pred.rows() - 2;
  const double S = static_cast<double>(pred.cols());
  const Eigen::MatrixXd d = pred - labels;
  const Eigen::MatrixXd e = mode == LossMode::MSE ? Eigen::MatrixXd(d.cwiseAbs2()) : Eigen::MatrixXd(d.cwiseAbs());
  return e.topRows(K).sum() / (S * static_cast<double>(K)) + e.bottomRows(2).sum() / S;
}

double objective(const MlpModel& m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, LossMode mode, double l2) {
  return loss(forward(m, x), y, mode) + l2 * l2_penalty(m);
}

Gradients gradients(const MlpModel& m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, LossMode mode,
                    double l2) {
  const auto z = forward_all(m, x);
  const Eigen::MatrixXd& out = z.back();
  if (out.rows() != y.rows() || out.cols() != y.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "labels do not match the network output");
  }
  const auto K = out.rows() - 2;
  const double S = static_cast<double>(out.cols());

  Gradients g;
  g.loss = loss(out, y, mode) + l2 * l2_penalty(m);

  // dLoss/dOutput, per-slot weights 1/(S K) for powers and 1/S for location
  Eigen::MatrixXd d = out - y;
  if (mode == LossMode::MSE) {
    d *= 2.0;
  } else {
    d = d.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
  }
  d.topRows(K) /= S * static_cast<double>(K);
  d.bottomRows(2) /= S;
  Eigen::MatrixXd delta = d.cwiseProduct(out.cwiseProduct((1.0 - out.array()).matrix()));

  const int L = m.layers();
  g.w.resize(static_cast<std::size_t>(L));
  g.b.resize(static_cast<std::size_t>(L));
  for (int l = L - 1; l >= 0; --l) {
    const auto ul = static_cast<std::size_t>(l);
    g.w[ul] = delta * z[ul].transpose() + 2.0 * l2 * m.weights[ul];
    g.b[ul] = delta.rowwise().sum();
    if (l > 0) {
      delta = (m.weights[ul].transpose() * delta).cwiseProduct(
          z[ul].unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
    }
  }
  return g;
}

std::vector<double> gradient_check(const MlpModel& m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                   LossMode mode, double l2, int probes, std::uint64_t seed, double h) {
  const auto g = gradients(m, x, y, mode, l2);
  MlpModel probe = m;
  Rng rng(seed);
  auto rel = [](double a, double n) { return std::abs(a - n) / std::max({1e-8, std::abs(a), std::abs(n)}); };
  auto numeric = [&](double& slot) {
    const double keep = slot;
    slot = keep + h;
    const double up = objective(probe, x, y, mode, l2);
    slot = keep - h;
    const double down = objective(probe, x, y, mode, l2);
    slot = keep;
    return (up - down) / (2.0 * h);
  };
  std::vector<double> worst;
  for (int l = 0; l < m.layers(); ++l) {
    const auto ul = static_cast<std::size_t>(l);
    double err = 0.0;
    auto& w = probe.weights[ul];
    for (int p = 0; p < probes; ++p) {
      const auto r = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(w.rows()));
      const auto c = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(w.cols()));
      err = std::max(err, rel(g.w[ul](r, c), numeric(w(r, c))));
    }
    auto& b = probe.biases[ul];
    for (Eigen::Index r = 0; r < b.size(); ++r) err = std::max(err, rel(g.b[ul](r), numeric(b(r))));
    worst.push_back(err);
  }
  return worst;
}

Eigen::MatrixXd Dataset::feature_matrix(std::size_t from, std::size_t to) const {
  if (from >= to) return {};
  Eigen::MatrixXd x(samples[from].features.size(), static_cast<Eigen::Index>(to - from));
  for (std::size_t i = from; i < to; ++i) x.col(static_cast<Eigen::Index>(i - from)) = samples[i].features;
  return x;
}

Eigen::MatrixXd Dataset::label_matrix(std::size_t from, std::size_t to) const {
  if (from >= to) return {};
  Eigen::MatrixXd y(samples[from].labels.size(), static_cast<Eigen::Index>(to - from));
  for (std::size_t i = from; i < to; ++i) y.col(static_cast<Eigen::Index>(i - from)) = samples[i].labels;
  return y;
}

std::size_t Dataset::split_index(double train_fraction) const {
  return static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(samples.size())));
}

namespace {

void adam_update(MlpModel& m, const Gradients& g, double lr) {
  constexpr double b1 = 0.9;
  constexpr double b2 = 0.999;
  constexpr double eps = 1e-8;
  ++m.step;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(m.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(m.step));
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    m.m_w[l] = b1 * m.m_w[l] + (1.0 - b1) * g.w[l];
    m.v_w[l] = b2 * m.v_w[l] + (1.0 - b2) * g.w[l].cwiseAbs2();
    m.weights[l].array() -= lr * (m.m_w[l].array() / c1) / ((m.v_w[l].array() / c2).sqrt() + eps);
    m.m_b[l] = b1 * m.m_b[l] + (1.0 - b1) * g.b[l];
    m.v_b[l] = b2 * m.v_b[l] + (1.0 - b2) * g.b[l].cwiseAbs2();
    m.biases[l].array() -= lr * (m.m_b[l].array() / c1) / ((m.v_b[l].array() / c2).sqrt() + eps);
  }
}

}  // namespace

TrainReport train(MlpModel& m, const Dataset& data, const TrainConfig& cfg) {
  if (data.samples.empty()) throw Error(ErrorKind::InvalidArgument, "dataset is empty");
  if (cfg.epochs < 0 || cfg.batch_size < 1) throw Error(ErrorKind::InvalidArgument, "bad epochs or batch size");
  const std::size_t split = std::max<std::size_t>(1, data.split_index(cfg.train_fraction));
  if (static_cast<std::size_t>(cfg.batch_size) > split) {
    throw Error(ErrorKind::InvalidArgument, "batch size exceeds the training set");
  }
  const Eigen::MatrixXd x_train = data.feature_matrix(0, split);
  const Eigen::MatrixXd y_train = data.label_matrix(0, split);
  const Eigen::MatrixXd x_val = data.feature_matrix(split, data.samples.size());
  const Eigen::MatrixXd y_val = data.label_matrix(split, data.samples.size());

  TrainReport rep;
  std::vector<Eigen::Index> order(split);
  for (std::size_t i = 0; i < split; ++i) order[i] = static_cast<Eigen::Index>(i);
  for (int e = 0; e < cfg.epochs; ++e) {
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(e)}));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < split; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(split, start + static_cast<std::size_t>(cfg.batch_size));
      Eigen::MatrixXd xb(x_train.rows(), static_cast<Eigen::Index>(end - start));
      Eigen::MatrixXd yb(y_train.rows(), static_cast<Eigen::Index>(end - start));
      for (std::size_t i = start; i < end; ++i) {
        xb.col(static_cast<Eigen::Index>(i - start)) = x_train.col(order[i]);
        yb.col(static_cast<Eigen::Index>(i - start)) = y_train.col(order[i]);
      }
      const auto g = gradients(m, xb, yb, cfg.loss, cfg.l2);
      if (!std::isfinite(g.loss)) {
        std::ostringstream os;
        os << "non-finite loss at epoch " << e << ", batch starting " << start;
        throw Error(ErrorKind::NonfiniteLoss, os.str());
      }
      if (cfg.lr != 0.0) adam_update(m, g, cfg.lr);
    }
    rep.train_loss.push_back(loss(forward(m, x_train), y_train, cfg.loss));
    if (x_val.cols() > 0) {
      const auto pv = forward(m, x_val);
      rep.val_mse.push_back(loss(pv, y_val, LossMode::MSE));
      rep.val_mae.push_back(loss(pv, y_val, LossMode::MAE));
    }
  }
  return rep;
}

Eigen::VectorXd make_labels(const LocSolution& sol, const DeploymentBox& box) {
  const auto K = static_cast<Eigen::Index>(sol.alloc.p.size());
  Eigen::VectorXd y(K + 2);
  double p_max = 0.0;
  for (double p : sol.alloc.p) p_max = std::max(p_max, p);
  for (Eigen::Index k = 0; k < K; ++k) y(k) = p_max > 0.0 ? sol.alloc.p[static_cast<std::size_t>(k)] / p_max : 0.0;
  const auto [u, v] = box.to_unit(sol.location);
  y(K) = u;
  y(K + 1) = v;
  return y;
}

std::pair<PowerAlloc, Point2D> predict_and_denormalize(const Eigen::VectorXd& outputs, const CMatrix& b_ut,
                                                       double p_t_mw, const DeploymentBox& box) {
  const auto K = b_ut.cols();
  if (outputs.size() != K + 2) throw Error(ErrorKind::ShapeMismatch, "network output length != K + 2");
  std::vector<double> p_hat;
  for (Eigen::Index k = 0; k < K; ++k) p_hat.push_back(std::max(0.0, outputs(k)));
  return {scale_to_budget(p_hat, b_ut, p_t_mw), box.from_unit(outputs(K), outputs(K + 1))};
}

Decision predict_decision(const MlpModel& m, const RealizationFactory& f) {
  const Eigen::VectorXd out = forward(m, realization_features(f));
  const int K = f.users();
  if (out.size() != K + 2) throw Error(ErrorKind::ShapeMismatch, "network output length != K + 2");
  Decision d;
  d.location = f.box().from_unit(out(K), out(K + 1));
  const auto st = f.stages_at(d.location);
  d.alloc = predict_and_denormalize(out, st.b_ut, f.tx_power_mw(), f.box()).first;
  d.rates = evaluate_rates(st, d.alloc, f.noise_mw());
  return d;
}

Sample make_sample(const Scenario& s, const PsoConfig& pso, std::uint64_t realization_seed) {
  RealizationFactory f(s, realization_seed);
  const auto sol = solve_joint(f, reseeded(pso, realization_seed));
  return Sample{realization_seed, realization_features(f), make_labels(sol, f.box())};
}

namespace {

std::string sample_to_line(const Sample& smp) {
  const std::vector<double> feats(smp.features.data(), smp.features.data() + smp.features.size());
  const std::vector<double> labels(smp.labels.data(), smp.labels.data() + smp.labels.size());
  return io::json{{"seed", smp.seed}, {"features", feats}, {"labels", labels}}.dump();
}

Sample sample_from_line(const std::string& line) {
  const auto j = io::json::parse(line);
  Sample smp;
  smp.seed = j.at("seed").get<std::uint64_t>();
  const auto feats = j.at("features").get<std::vector<double>>();
  const auto labels = j.at("labels").get<std::vector<double>>();
  smp.features = Eigen::Map<const Eigen::VectorXd>(feats.data(), static_cast<Eigen::Index>(feats.size()));
  smp.labels = Eigen::Map<const Eigen::VectorXd>(labels.data(), static_cast<Eigen::Index>(labels.size()));
  return smp;
}

}  // namespace

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open dataset " + path);
  Dataset d;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    try {
      d.samples.push_back(sample_from_line(line));
    } catch (const io::json::exception& e) {
      throw Error(ErrorKind::Io, path + ":" + std::to_string(row) + ": " + e.what());
    }
  }
  if (!d.samples.empty()) d.users = static_cast<int>(d.samples.front().labels.size()) - 2;
  return d;
}

Dataset generate_dataset(std::size_t n, const Scenario& s, const PsoConfig& pso, std::uint64_t seed,
                         const std::string& path, DatasetOptions opts) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "dataset needs at least one realization");
  Dataset d;
  d.users = s.user_count();
  if (!path.empty() && std::filesystem::exists(path)) {
    d = load_dataset(path);
    d.users = s.user_count();
    for (std::size_t i = 0; i < d.samples.size(); ++i) {
      if (d.samples[i].seed != derive_seed(seed, {i})) {
        throw Error(ErrorKind::Io, "existing dataset " + path + " was generated with a different seed (record " +
                                       std::to_string(i) + ")");
      }
    }
    if (d.samples.size() > n) d.samples.resize(n);
  }
  std::ofstream out;
  if (!path.empty()) {
    out.open(path, std::ios::app);
    if (!out) throw Error(ErrorKind::Io, "cannot append to " + path);
  }
  const int workers = std::max(1, opts.workers);
  const std::size_t chunk = std::max<std::size_t>(1, opts.chunk);
  while (d.samples.size() < n) {
    const std::size_t base = d.samples.size();
    const std::size_t count = std::min(chunk, n - base);
    std::vector<Sample> slot(count);
    std::vector<std::string> failure(count);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          slot[i] = make_sample(s, pso, derive_seed(seed, {base + i}));
        } catch (const std::exception& e) {
          failure[i] = e.what();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (std::size_t i = 0; i < count; ++i) {
      if (!failure[i].empty()) {
        throw Error(ErrorKind::NumericalFailure, "realization " + std::to_string(base + i) + ": " + failure[i]);
      }
      if (out.is_open()) out << sample_to_line(slot[i]) << '\n';
      d.samples.push_back(std::move(slot[i]));
    }
    if (out.is_open()) {
      out.flush();
      if (!out) throw Error(ErrorKind::Io, "write failed for " + path + " at realization " + std::to_string(base));
    }
  }
  return d;
}

std::string model_to_json(const MlpModel& m) {
  io::json w = io::json::array(), b = io::json::array();
  io::json mw = io::json::array(), vw = io::json::array(), mb = io::json::array(), vb = io::json::array();
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    w.push_back(io::real_to_json(m.weights[l]));
    b.push_back(io::real_to_json(m.biases[l]));
    mw.push_back(io::real_to_json(m.m_w[l]));
    vw.push_back(io::real_to_json(m.v_w[l]));
    mb.push_back(io::real_to_json(m.m_b[l]));
    vb.push_back(io::real_to_json(m.v_b[l]));
  }
  return io::json{{"format", "uavrelay-mlp"},
                  {"version", 1},
                  {"sizes", m.sizes},
                  {"weights", w},
                  {"biases", b},
                  {"adam", {{"step", m.step}, {"m_w", mw}, {"v_w", vw}, {"m_b", mb}, {"v_b", vb}}}}
      .dump();
}

MlpModel model_from_json(const std::string& text) {
  try {
    const auto j = io::json::parse(text);
    if (j.value("format", std::string()) != "uavrelay-mlp") throw Error(ErrorKind::Io, "not a uavrelay model checkpoint");
    if (j.at("version").get<int>() != 1) throw Error(ErrorKind::Io, "unsupported model version");
    MlpModel m = make_mlp(j.at("sizes").get<std::vector<int>>(), 0);
    auto vec = [](const io::json& v) {
      Eigen::MatrixXd b = io::real_from_json(v);
      return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(b.data(), b.size()));
    };
    for (int l = 0; l < m.layers(); ++l) {
      const auto ul = static_cast<std::size_t>(l);
      auto w = io::real_from_json(j.at("weights").at(ul));
      auto b = vec(j.at("biases").at(ul));
      if (w.rows() != m.weights[ul].rows() || w.cols() != m.weights[ul].cols() || b.size() != m.biases[ul].size()) {
        throw Error(ErrorKind::ShapeMismatch, "checkpoint layer " + std::to_string(l) + " has the wrong shape");
      }
      m.weights[ul] = w;
      m.biases[ul] = b;
    }
    // optimizer state is optional; inference-only checkpoints omit it
    if (j.contains("adam")) {
      const auto& a = j.at("adam");
      m.step = a.at("step").get<long>();
      for (std::size_t l = 0; l < m.weights.size(); ++l) {
        m.m_w[l] = io::real_from_json(a.at("m_w").at(l));
        m.v_w[l] = io::real_from_json(a.at("v_w").at(l));
        m.m_b[l] = vec(a.at("m_b").at(l));
        m.v_b[l] = vec(a.at("v_b").at(l));
        if (m.m_w[l].rows() != m.weights[l].rows() || m.m_w[l].cols() != m.weights[l].cols() ||
            m.v_w[l].size() != m.weights[l].size() || m.m_b[l].size() != m.biases[l].size() ||
            m.v_b[l].size() != m.biases[l].size()) {
          throw Error(ErrorKind::ShapeMismatch, "checkpoint optimizer state has the wrong shape");
        }
      }
    }
    return m;
  } catch (const io::json::exception& e) {
    throw Error(ErrorKind::Io, std::string("malformed model checkpoint: ") + e.what());
  }
}

}  // namespace uavrelay
