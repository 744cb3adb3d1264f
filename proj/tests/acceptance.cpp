#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "support.hpp"

using namespace pips;

namespace {

/// Collects failed checks for one criterion.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream s;
    s << what << ": got " << got << ", want " << want << " +- " << tol;
    expect(std::abs(got - want) <= tol, s.str());
  }
  bool ok() const { return failed_ == 0; }
  std::string summary() const {
    std::string out;
    for (const auto& f : failures_) out += "\n    " + f;
    if (failed_ > failures_.size()) out += "\n    ... " + std::to_string(failed_ - failures_.size()) + " more";
    return out;
  }
  std::vector<std::string> notes;

 private:
  std::vector<std::string> failures_;
  std::size_t failed_ = 0;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool run_criterion(int number, const std::string& name, double budget_s, const std::function<void(Checks&)>& body) {
  Checks c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream t;
  t.precision(1);
  t << std::fixed << elapsed << " s, budget " << budget_s << " s";
  c.expect(elapsed < budget_s, "runtime " + t.str());
  std::cout << (c.ok() ? "PASS" : "FAIL") << " criterion " << number << ": " << name << " (" << t.str() << ")";
  for (const auto& n : c.notes) std::cout << "\n    " << n;
  std::cout << c.summary() << std::endl;
  return c.ok();
}

// ---------------------------------------------------------------- 1

void metric_oracles(Checks& c) {
  Rng rng(100);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng.index(499));
    const Matrix t = test::random_matrix(rng, n, 3, 0.0, 6.0);
    const Matrix p = t + test::random_matrix(rng, n, 3, -1.0, 1.0);
    c.near(rmse(t, p), oracle::rmse(t, p), 1e-12, "rmse trial " + std::to_string(trial));
    c.near(r2(t, p), oracle::r2(t, p), 1e-12, "r2 trial " + std::to_string(trial));
    c.near(ce95(t, p), oracle::ce95(t, p), 1e-12, "ce95 trial " + std::to_string(trial));
  }

  Matrix t(2, 3), z = Matrix::Zero(2, 3);
  t << 0, 0, 0, 1, 0, 0;
  c.expect(rmse(t, z) == std::sqrt(0.5), "rmse hand value sqrt(0.5)");

  Matrix errs = Matrix::Zero(100, 3);
  for (Eigen::Index i = 0; i < 100; ++i) errs(i, 0) = static_cast<double>(i + 1);
  c.near(ce95(errs, Matrix::Zero(100, 3)), 95.05, 1e-12, "ce95 of errors 1..100");

  Matrix rt(3, 3), rp(3, 3);
  for (int i = 0; i < 3; ++i) {
    rt.row(i).setConstant(i);
    rp.row(i).setConstant(std::min(i, 1));
  }
  c.expect(r2(rt, rp) == 0.5, "r2 hand value 0.5");
}

// ---------------------------------------------------------------- 2

void regressor_oracles(Checks& c) {
  Rng rng(6);
  for (int trial = 0; trial < 40; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + rng.index(200));
    const auto m = static_cast<Eigen::Index>(1 + rng.index(6));
    const bool coarse = trial % 2 == 0;
    const Matrix x = coarse ? test::random_grid_matrix(rng, n, m, 3) : test::random_matrix(rng, n, m);
    const Matrix y = test::random_matrix(rng, n, 3);
    const int k = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(std::min<Eigen::Index>(n, 9))));
    KnnRegressor model(k);
    model.fit(x, y);
    const Matrix q = coarse ? test::random_grid_matrix(rng, 25, m, 3) : test::random_matrix(rng, 25, m);
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      const auto expect = oracle::knn(x, q.row(i).data(), static_cast<std::size_t>(k));
      const auto got = model.neighbors(q.row(i).data());
      bool same = got.size() == expect.size();
      for (std::size_t r = 0; same && r < expect.size(); ++r) same = got[r].second == expect[r];
      c.expect(same, "knn trial " + std::to_string(trial) + " query " + std::to_string(i));
    }
  }

  Rng rng2(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng2.index(49));
    const auto m = static_cast<Eigen::Index>(1 + rng2.index(5));
    const Matrix x = test::random_matrix(rng2, n, m);
    const Matrix y = test::random_matrix(rng2, n, 3);
    CartRegressor model(1, 1);
    model.fit(x, y);
    const auto expect = oracle::best_root_split(x, y);
    const auto got = model.tree().root_split();
    c.expect(got && got->first == expect.feature && got->second == expect.threshold,
             "cart root split trial " + std::to_string(trial));
  }

  const double ell = 0.8, s2 = 1.7, jitter = 1e-8;
  Matrix gx(2, 2), gy(2, 3), q(1, 2);
  gx << 0.0, 0.0, 1.0, 0.5;
  gy << 1.0, -2.0, 0.5, 3.0, 4.0, 1.5;
  q << 0.3, 0.9;
  GprRegressor gpr(ell, s2, jitter);
  gpr.fit(gx, gy);
  const Matrix gp = gpr.predict(q);
  auto kern = [&](double ax, double ay, double bx, double by) {
    return s2 * std::exp(-((ax - bx) * (ax - bx) + (ay - by) * (ay - by)) / (2 * ell * ell));
  };
  const double a = s2 + jitter, b = kern(0, 0, 1, 0.5), det = a * a - b * b;
  const double k1 = kern(0.3, 0.9, 0, 0), k2 = kern(0.3, 0.9, 1, 0.5);
  for (int o = 0; o < 3; ++o) {
    const double mean = 0.5 * (gy(0, o) + gy(1, o));
    const double c1 = gy(0, o) - mean, c2 = gy(1, o) - mean;
    const double want = mean + k1 * (a * c1 - b * c2) / det + k2 * (-b * c1 + a * c2) / det;
    c.near(gp(0, o), want, 1e-9, "gpr two-point output " + std::to_string(o));
  }

  Rng rng3(16);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inputs = static_cast<Eigen::Index>(1 + rng3.index(4));
    const auto hidden = static_cast<Eigen::Index>(1 + rng3.index(6));
    const Matrix x = test::random_matrix(rng3, 8, inputs);
    const Matrix y = test::random_matrix(rng3, 8, 3);
    const MlpParams p = MlpRegressor::initial_params(inputs, hidden, 3, derive_seed(16, trial));
    MlpParams grad;
    mlp_loss(p, x, y, &grad);
    const Eigen::VectorXd g = grad.flatten(), theta = p.flatten();
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      MlpParams plus = p, minus = p;
      Eigen::VectorXd t = theta;
      t(i) += h;
      plus.assign(t);
      t(i) -= 2 * h;
      minus.assign(t);
      const double fd = (mlp_loss(plus, x, y, nullptr) - mlp_loss(minus, x, y, nullptr)) / (2 * h);
      c.expect(std::abs(fd - g(i)) <= 1e-4 * std::max(1.0, std::abs(fd)),
               "mlp gradient trial " + std::to_string(trial) + " param " + std::to_string(i));
    }
  }
}

// ---------------------------------------------------------------- 3

/// Predicts 0 when seeded with `first`, else 2.
class TwoConstants final : public Regressor {
 public:
  explicit TwoConstants(std::uint64_t first) : first_(first) {}
  std::unique_ptr<Regressor> clone() const override { return std::make_unique<TwoConstants>(first_); }
  std::string kind() const override { return "two-constants"; }
  void set_seed(std::uint64_t seed) override { seed_ = seed; }

 protected:
  void do_fit(const Matrix&, const Matrix& y) override { outputs_ = y.cols(); }
  Matrix do_predict(const Matrix& x) const override {
    return Matrix::Constant(x.rows(), outputs_, seed_ == first_ ? 0.0 : 2.0);
  }

 private:
  std::uint64_t first_;
  std::uint64_t seed_ = 0;
  Eigen::Index outputs_ = 0;
};

void ensemble_algebra(Checks& c) {
  c.expect(adaboost_beta(0.2) == 0.25, "adaboost beta(0.2) == 0.25");
  c.near(adaboost_round_weight(0.25), std::log(4.0), 1e-15, "adaboost round weight ln 4");

  Matrix x(2, 1), y(2, 3);
  x << 0.0, 1.0;
  y.row(0).setZero();
  y.row(1).setOnes();
  GradientBoosting gbr(BoostingOptions{1, 0.1, 3, 0, 0});
  gbr.fit(x, y);
  const Matrix p = gbr.predict(x);
  for (Eigen::Index o = 0; o < 3; ++o) {
    c.near(p(0, o), 0.45, 1e-12, "gbr one-stage low leaf");
    c.near(p(1, o), 0.55, 1e-12, "gbr one-stage high leaf");
  }

  Rng rng(40);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix hx = test::random_grid_matrix(rng, 150, 3, 10 + 40 * trial);
    Matrix hy = test::random_matrix(rng, 150, 3);
    hy.col(0) += hx.col(0);
    GradientBoosting exact(BoostingOptions{30, 0.2, 3, 0, 0});
    GradientBoosting hist(BoostingOptions{30, 0.2, 3, 255, 0});
    exact.fit(hx, hy);
    hist.fit(hx, hy);
    c.expect((exact.predict(hx) - hist.predict(hx)).cwiseAbs().maxCoeff() < 1e-12,
             "hgbr equals gbr, trial " + std::to_string(trial));
  }

  // A bag of two members whose seeds map to constants 0 and 2 predicts exactly 1.
  const std::uint64_t seed = 9;
  BaggingRegressor bag(std::make_unique<TwoConstants>(derive_seed(seed, 0, 1)), 2, true, seed);
  bag.fit(Matrix::Zero(4, 2), Matrix::Zero(4, 3));
  c.expect(bag.predict(Matrix::Zero(3, 2)).isConstant(1.0), "bagging of constants 0 and 2 predicts 1");

  Rng srng(80);
  for (int n_bases = 1; n_bases <= 10; ++n_bases) {
    const Matrix sx = test::random_matrix(srng, 40, 3), sy = test::random_matrix(srng, 40, 3);
    std::vector<std::unique_ptr<Regressor>> bases;
    for (int i = 0; i < n_bases; ++i) bases.push_back(std::make_unique<KnnRegressor>(1 + i % 3));
    StackingRegressor stack(std::move(bases), std::make_unique<KnnRegressor>(), 5, 1);
    stack.fit(sx, sy);
    c.expect(stack.bases().meta.cols() == 3 * n_bases && stack.bases().meta_features(sx).cols() == 3 * n_bases,
             "stacking meta width for " + std::to_string(n_bases) + " bases");
  }

  // Out-of-fold audit: disjoint folds, and every meta entry reproduced by a model that never saw the row.
  Rng arng(82);
  const Matrix ax = test::random_matrix(arng, 53, 3), ay = test::random_matrix(arng, 53, 3);
  std::vector<std::unique_ptr<Regressor>> protos;
  protos.push_back(std::make_unique<KnnRegressor>(1));
  protos.push_back(std::make_unique<CartRegressor>());
  const int folds = 4;
  const auto layer = StackedBases::fit(protos, ax, ay, folds, 6);
  std::vector<int> size(folds, 0);
  for (int f : layer->row_fold) ++size[static_cast<std::size_t>(f)];
  c.expect(*std::max_element(size.begin(), size.end()) - *std::min_element(size.begin(), size.end()) <= 1,
           "fold sizes differ by at most one");
  for (std::size_t i = 0; i < 53; ++i) {
    const auto& train = layer->fold_train_rows[static_cast<std::size_t>(layer->row_fold[i])];
    c.expect(std::find(train.begin(), train.end(), i) == train.end(), "row " + std::to_string(i) + " in own fold");
  }
  for (std::size_t b = 0; b < protos.size(); ++b) {
    for (int f = 0; f < folds; ++f) {
      const auto& rows = layer->fold_train_rows[static_cast<std::size_t>(f)];
      Matrix xs(static_cast<Eigen::Index>(rows.size()), 3), ys(static_cast<Eigen::Index>(rows.size()), 3);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        xs.row(static_cast<Eigen::Index>(r)) = ax.row(static_cast<Eigen::Index>(rows[r]));
        ys.row(static_cast<Eigen::Index>(r)) = ay.row(static_cast<Eigen::Index>(rows[r]));
      }
      auto model = protos[b]->clone();
      model->set_seed(derive_seed(6, b + 1, static_cast<std::uint64_t>(f)));
      model->fit(xs, ys);
      for (std::size_t i = 0; i < 53; ++i) {
        if (layer->row_fold[i] != f) continue;
        const Matrix pr = model->predict(ax.row(static_cast<Eigen::Index>(i)));
        c.expect(layer->meta.block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b) * 3, 1, 3) == pr,
                 "meta entry row " + std::to_string(i) + " base " + std::to_string(b));
      }
    }
  }
  for (Eigen::Index i = 0; i < 53; ++i) {
    c.expect(layer->meta.row(i).head(3) != ay.row(i), "1-NN meta reproduces own label at row " + std::to_string(i));
  }
}

// ---------------------------------------------------------------- 4

void synthetic_benchmark(Checks& c) {
  const auto ids = expand_model_list({"baseline-all", "stacking-all"});
  int held = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto setup = make_paper_scenario(seed);
    const Dataset data = generate_dataset(setup.scenario, setup.sensor, setup.positions);
    const auto split = train_test_split(data, 0.7, seed);
    const auto rows = benchmark(ids, split, seed);
    double best_base = std::numeric_limits<double>::infinity();
    std::string best_base_id;
    for (const auto& r : rows) {
      c.expect(r.ok(), "seed " + std::to_string(seed) + " " + r.model_id + ": " + r.error);
      if (detail::is_base(r.model_id) && r.rmse_m < best_base) {
        best_base = r.rmse_m;
        best_base_id = r.model_id;
      }
    }
    const EvalReport* best_stack = nullptr;
    bool seed_holds = false;
    for (const auto& r : rows) {
      if (detail::is_base(r.model_id) || !r.ok()) continue;
      if (!best_stack || r.rmse_m < best_stack->rmse_m) best_stack = &r;
      seed_holds = seed_holds || (r.rmse_m <= best_base && r.ce95_m <= 1.5 * r.rmse_m);
    }
    held += seed_holds;
    std::ostringstream note;
    note.precision(4);
    note << "seed " << seed << ": best baseline " << best_base_id << " " << best_base;
    if (best_stack) {
      note << ", best stacking " << best_stack->model_id << " " << best_stack->rmse_m << " (ce95 "
           << best_stack->ce95_m << ")";
    }
    note << (seed_holds ? " holds" : " misses");
    std::cout << "    " << note.str() << std::endl;
  }
  c.notes.push_back(std::to_string(held) + "/20 seeds hold, need 16");
  c.expect(held >= 16, std::to_string(held) + "/20 seeds with stacking <= best baseline and ce95 <= 1.5 rmse");
}

// ---------------------------------------------------------------- 5

void band_selection(Checks& c) {
  int found = 0;
  std::vector<double> ratios;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto setup = make_fullband_scenario(seed, 400);
    const auto r = dddas_cycle(setup.scenario, setup.sensor, setup.positions, "dtr", 5, seed);
    const auto top = top_frequencies(r.importance, 10);
    bool all = true;
    for (std::size_t i : setup.informative) all = all && std::find(top.begin(), top.end(), i) != top.end();
    found += all;
    c.near(sampling_reduction(setup.sensor, r.config), 0.9875, 1e-12, "sampling reduction seed " + std::to_string(seed));
    ratios.push_back(r.after.rmse_m / r.before.rmse_m);
  }
  std::sort(ratios.begin(), ratios.end());
  const double median = 0.5 * (ratios[9] + ratios[10]);
  std::ostringstream note;
  note << found << "/20 seeds with all informative frequencies in the top 10; median after/before rmse " << median;
  c.notes.push_back(note.str());
  c.expect(found >= 19, std::to_string(found) + "/20 seeds recover the informative frequencies");
  c.expect(median <= 1.25, "median after/before rmse ratio <= 1.25");
}

// ---------------------------------------------------------------- 6

double silhouette(const Matrix& points, const std::vector<int>& label, int n_labels) {
  const auto n = points.rows();
  std::vector<int> count(static_cast<std::size_t>(n_labels), 0);
  for (int l : label) ++count[static_cast<std::size_t>(l)];
  double total = 0.0;
  std::vector<double> sum(static_cast<std::size_t>(n_labels));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::fill(sum.begin(), sum.end(), 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      sum[static_cast<std::size_t>(label[static_cast<std::size_t>(j)])] += (points.row(i) - points.row(j)).norm();
    }
    const auto own = static_cast<std::size_t>(label[static_cast<std::size_t>(i)]);
    if (count[own] < 2) continue;
    const double a = sum[own] / (count[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < sum.size(); ++l) {
      if (l != own && count[l] > 0) b = std::min(b, sum[l] / count[l]);
    }
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(n);
}

void pca_checks(Checks& c) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix x = test::random_matrix(rng, 6 + static_cast<Eigen::Index>(rng.index(30)), 4, -5.0, 5.0);
    const auto model = pca_fit(x, 4);
    c.expect((model.components * model.components.transpose() - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <
                 1e-8,
             "orthonormal components, trial " + std::to_string(trial));
    Matrix centred = x.rowwise() - x.colwise().mean();
    const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(x.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(cov);
    for (Eigen::Index i = 0; i < 4; ++i) {
      const double lambda = ref.eigenvalues()(3 - i);
      c.near(model.explained_variance(i), std::max(lambda, 0.0), 1e-8, "eigenvalue " + std::to_string(i));
      Vector v = ref.eigenvectors().col(3 - i);
      Eigen::Index arg = 0;
      v.cwiseAbs().maxCoeff(&arg);
      if (v(arg) < 0.0) v = -v;
      if (lambda > 1e-6) {
        c.expect((model.components.row(i).transpose() - v).cwiseAbs().maxCoeff() < 1e-8,
                 "eigenvector " + std::to_string(i) + ", trial " + std::to_string(trial));
      }
    }
  }

  Matrix line(20, 2);
  for (Eigen::Index i = 0; i < 20; ++i) {
    line(i, 0) = 0.3 * static_cast<double>(i) - 1.0;
    line(i, 1) = -2.0 * line(i, 0) + 4.0;
  }
  c.near(pca_fit(line, 1).explained_ratio(0), 1.0, 1e-9, "rank-1 first ratio");

  const auto setup = make_paper_scenario(5);
  const Dataset d = generate_dataset(setup.scenario, setup.sensor, setup.positions);
  const Matrix scores = pca_transform(pca_fit(d.features(), 3), d.features());
  std::vector<int> label(static_cast<std::size_t>(d.n()));
  for (std::size_t i = 0; i < label.size(); ++i) {
    label[i] = static_cast<int>(i / setup.sensor.samples_per_position);
  }
  const double s = silhouette(scores, label, static_cast<int>(setup.positions.size()));
  c.notes.push_back("silhouette of 3-component scores vs position: " + std::to_string(s));
  c.expect(s > 0.0, "silhouette > 0");
}

// ---------------------------------------------------------------- 7

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Benchmark CSV without the timing column.
std::string metric_columns(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

void cli_determinism(Checks& c) {
  const auto dir = std::filesystem::temp_directory_path() / ("pips_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  auto path = [&](const std::string& name) { return (dir / name).string(); };
  auto run = [&](const std::string& args) {
    const std::string cmd = std::string(PIPS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    c.expect(status == 0, "exit status of: " + args);
  };
  for (const char* tag : {"1", "2"}) {
    const std::string t = tag;
    run("simulate --paper-scenario --seed 11 --out " + path("sim" + t + ".csv"));
    run("benchmark --data " + path("sim1.csv") + " --models baseline-all --seed 11 --out " + path("bench" + t + ".csv"));
    run("select-band --data " + path("sim1.csv") + " --model dtr --top-k 3 --seed 11 --out " + path("imp" + t + ".csv") +
        " --sensor-out " + path("sensor" + t + ".json"));
    run("pca --data " + path("sim1.csv") + " --components 3 --out " + path("pca" + t + ".csv"));
  }
  auto same = [&](const std::string& a, const std::string& b, const std::string& what) {
    const std::string x = slurp(path(a)), y = slurp(path(b));
    c.expect(!x.empty() && x == y, what + " outputs differ or are empty");
  };
  same("sim1.csv", "sim2.csv", "simulate");
  c.expect(metric_columns(slurp(path("bench1.csv"))) == metric_columns(slurp(path("bench2.csv"))) &&
               !slurp(path("bench1.csv")).empty(),
           "benchmark metric columns differ");
  same("imp1.csv", "imp2.csv", "select-band importance");
  same("sensor1.json", "sensor2.json", "select-band sensor");
  same("pca1.csv", "pca2.csv", "pca");
  std::filesystem::remove_all(dir);
}

// ---------------------------------------------------------------- 8

std::size_t parse_error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_rtl_power(in);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

void rtl_power_ingestion(Checks& c) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const double low = 24e6 + 1e4 * static_cast<double>(rng.index(100000));
    const double step = 1e3 * static_cast<double>(1 + rng.index(1000));
    const std::size_t k = 1 + rng.index(40);
    const std::size_t sweeps = 1 + rng.index(4);
    std::vector<std::vector<double>> db(sweeps, std::vector<double>(k));
    std::ostringstream text;
    for (std::size_t s = 0; s < sweeps; ++s) {
      text << "2024-02-02, 10:00:0" << s << ", " << format_double(low) << ", "
           << format_double(low + step * static_cast<double>(k)) << ", " << format_double(step) << ", 16";
      for (auto& v : db[s]) {
        v = std::round(rng.uniform(-90.0, -20.0) * 100.0) / 100.0;
        text << ", " << format_double(v);
      }
      text << '\n';
    }
    std::istringstream in(text.str());
    const Dataset d = ingest_rtl_power(in, {1, 2, 0.5}, std::nullopt, step / 1e6);
    c.expect(d.m() == k && d.n() == sweeps, "shape, trial " + std::to_string(trial));
    if (d.m() != k || d.n() != sweeps) continue;
    for (std::size_t i = 0; i < k; ++i) {
      c.expect(d.frequencies()[i] == (low + static_cast<double>(i) * step) / 1e6,
               "frequency arithmetic, trial " + std::to_string(trial));
      for (std::size_t s = 0; s < sweeps; ++s) {
        c.expect(d.features()(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i)) == db[s][i],
                 "reading value, trial " + std::to_string(trial));
      }
    }
    const std::size_t pick = rng.index(k);
    std::istringstream again(text.str());
    const Dataset one = ingest_rtl_power(again, {1, 2, 0.5},
                                         std::vector<double>{(low + static_cast<double>(pick) * step) / 1e6}, step / 1e6);
    c.expect(one.m() == 1 && one.features()(0, 0) == db[0][pick], "band filter, trial " + std::to_string(trial));
  }

  const std::string good = "2024-01-01, 12:00:00, 91000000, 91600000, 200000, 10, -40, -41, -42\n";
  c.expect(parse_error_line(good + "2024-01-01, 12:00:00, 91000000\n") == 2, "short row reported on line 2");
  c.expect(parse_error_line(good + good + "2024-01-01, 12:00:00, 91000000, 91600000, 200000, 10, -40, oops\n") == 3,
           "bad reading reported on line 3");
  c.expect(parse_error_line("2024-01-01, 12:00:00, 91000000, 91600000, 0, 10, -40\n") == 1,
           "zero step reported on line 1");
  std::istringstream unmatched(good);
  bool threw = false;
  try {
    ingest_rtl_power(unmatched, {0, 0, 0}, std::vector<double>{100.0}, 2.4);
  } catch (const ParseError&) {
    threw = true;
  }
  c.expect(threw, "band outside the scan is rejected");
}

}  // namespace

int main() {
  std::cout.setf(std::ios::unitbuf);
  int failed = 0;
  failed += !run_criterion(1, "metric oracles", 5, metric_oracles);
  failed += !run_criterion(2, "regressor oracles", 30, regressor_oracles);
  failed += !run_criterion(3, "ensemble algebra", 60, ensemble_algebra);
  failed += !run_criterion(4, "synthetic benchmark, stacking vs baselines", 600, synthetic_benchmark);
  failed += !run_criterion(5, "band selection on the full band", 900, band_selection);
  failed += !run_criterion(6, "pca", 30, pca_checks);
  failed += !run_criterion(7, "cli determinism", 300, cli_determinism);
  failed += !run_criterion(8, "rtl_power ingestion", 5, rtl_power_ingestion);
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria fail") << std::endl;
  return failed == 0 ? 0 : 1;
}
