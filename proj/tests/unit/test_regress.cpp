#include <cmath>
#include <set>

#include "doctest.h"
#include "emod/error.hpp"
#include "emod/random.hpp"
#include "emod/regress.hpp"

using namespace emod;

namespace {

Eigen::MatrixXd random_counts(int m, int l, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd n(m, l);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < l; ++j) n(i, j) = static_cast<double>(rng.uniform_int(0, 1000));
  return n;
}

Eigen::VectorXd random_costs(int l, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd c(l);
  for (int j = 0; j < l; ++j) c(j) = rng.uniform(0.5e-6, 20e-6);
  return c;
}

FitConfig tight() {
  FitConfig f;
  f.restarts = 2;
  f.epsilon = 1e-14;
  f.max_iters = 400000;
  f.jobs = 1;
  return f;
}

}  // namespace

TEST_SUITE("regress") {
  TEST_CASE("loss and gradient on a hand example") {
    Eigen::MatrixXd n(2, 2);
    n << 1, 2, 3, 4;
    Eigen::VectorXd c(2), e(2);
    c << 1, 1;
    e << 2, 8;
    // residuals 1 and -1
    CHECK(loss(n, c, e) == doctest::Approx(0.5));
    Eigen::VectorXd g = gradient(n, c, e);
    CHECK(g(0) == doctest::Approx(-1.0));
    CHECK(g(1) == doctest::Approx(-1.0));
    CHECK(loss(n, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)) == 0.0);
  }

  TEST_CASE("dimension mismatches are rejected") {
    Eigen::MatrixXd n = Eigen::MatrixXd::Ones(3, 2);
    CHECK_THROWS_AS(loss(n, Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(3)), DimensionError);
    CHECK_THROWS_AS(gradient(n, Eigen::VectorXd::Ones(2), Eigen::VectorXd::Ones(2)), DimensionError);
  }

  TEST_CASE("gradient matches central differences") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      Eigen::MatrixXd n = random_counts(12, 7, s);
      Eigen::VectorXd c = random_costs(7, s + 100);
      Eigen::VectorXd e = n * random_costs(7, s + 200);
      Eigen::VectorXd g = gradient(n, c, e);
      for (int j = 0; j < 7; ++j) {
        double h = 1e-6 * std::max(std::abs(c(j)), 1e-9);
        Eigen::VectorXd up = c, down = c;
        up(j) += h;
        down(j) -= h;
        double fd = (loss(n, up, e) - loss(n, down, e)) / (2 * h);
        CHECK(std::abs(fd - g(j)) <= 1e-6 * std::max(std::abs(g(j)), 1e-12) + 1e-9 * g.norm());
      }
    }
  }

  TEST_CASE("identity design recovers the energies") {
    Eigen::MatrixXd n = Eigen::MatrixXd::Identity(3, 3);
    Eigen::VectorXd e(3);
    e << 2e-3, 5e-3, 1e-3;
    CostModel m = fit(n, e, tight());
    for (int j = 0; j < 3; ++j) CHECK(m.cost_j[j] == doctest::Approx(e(j)).epsilon(1e-6));
  }

  TEST_CASE("full-rank fit agrees with the least-squares solution") {
    Eigen::MatrixXd n = random_counts(40, 10, 3);
    Eigen::VectorXd truth = random_costs(10, 4);
    Rng rng(5);
    Eigen::VectorXd e = n * truth;
    for (int i = 0; i < e.size(); ++i) e(i) *= 1.0 + 0.02 * rng.normal();
    Eigen::VectorXd ls = n.colPivHouseholderQr().solve(e);
    CostModel m = fit(n, e, tight());
    for (int j = 0; j < 10; ++j) CHECK(m.cost_j[j] == doctest::Approx(ls(j)).epsilon(1e-4));
  }

  TEST_CASE("identical columns share their sum") {
    Eigen::MatrixXd n(4, 2);
    n << 1, 1, 2, 2, 3, 3, 5, 5;
    Eigen::VectorXd e = n.col(0) * 3.0;
    CostModel m = fit(n, e, tight());
    CHECK(m.cost_j[0] + m.cost_j[1] == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(column_rank(n) == 1);
  }

  TEST_CASE("loss history never rises") {
    Eigen::MatrixXd n = random_counts(30, 8, 8);
    Eigen::VectorXd e = n * random_costs(8, 9);
    CostModel m = fit(n, e, tight());
    REQUIRE(!m.j_history.empty());
    for (std::size_t i = 1; i < m.j_history.size(); ++i) CHECK(m.j_history[i] <= m.j_history[i - 1]);
    CHECK(m.final_j == m.j_history.back());
  }

  TEST_CASE("scaling the energies scales the costs") {
    Eigen::MatrixXd n = random_counts(25, 6, 12);
    Eigen::VectorXd e = n * random_costs(6, 13);
    CostModel a = fit(n, e, tight());
    CostModel b = fit(n, 1000.0 * e, tight());
    for (int j = 0; j < 6; ++j) CHECK(b.cost_j[j] == doctest::Approx(1000.0 * a.cost_j[j]).epsilon(1e-5));
  }

  TEST_CASE("non-negative fits stay non-negative") {
    Eigen::MatrixXd n = random_counts(20, 6, 21);
    Eigen::VectorXd c = random_costs(6, 22);
    c(2) = 0.0;
    Rng rng(23);
    Eigen::VectorXd e = n * c;
    for (int i = 0; i < e.size(); ++i) e(i) *= 1.0 + 0.1 * rng.normal();
    FitConfig f = tight();
    f.nonneg = true;
    CostModel m = fit(n, e, f);
    for (double v : m.cost_j) CHECK(v >= 0.0);
  }

  TEST_CASE("fits are deterministic under a seed") {
    Eigen::MatrixXd n = random_counts(20, 5, 31);
    Eigen::VectorXd e = n * random_costs(5, 32);
    FitConfig f = tight();
    f.jobs = 3;
    CostModel a = fit(n, e, f);
    f.jobs = 1;
    CostModel b = fit(n, e, f);
    CHECK(a.cost_j == b.cost_j);
    CHECK(a.iterations == b.iterations);
  }

  TEST_CASE("empty input is rejected") {
    CHECK_THROWS_AS(fit(Eigen::MatrixXd(0, 0), Eigen::VectorXd(0), FitConfig{}), FitError);
  }

  TEST_CASE("nmae and correlation") {
    Eigen::VectorXd meas(3), est(3);
    meas << 1.0, 2.0, 4.0;
    est << 1.1, 1.8, 4.0;
    CHECK(nmae(est, meas) == doctest::Approx((0.1 + 0.1 + 0.0) / 3.0));
    Eigen::VectorXd with_zero(3);
    with_zero << 0.0, 2.0, 4.0;
    int dropped = 0;
    CHECK(nmae(est, with_zero, &dropped) == doctest::Approx(0.05));
    CHECK(dropped == 1);
    CHECK(correlation(meas, 2.0 * meas + Eigen::VectorXd::Ones(3)) == doctest::Approx(1.0));
    CHECK(correlation(meas, -meas) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(correlation(meas, Eigen::VectorXd::Ones(3)), FitError);
  }

  TEST_CASE("cross-validation partitions the rows") {
    Eigen::MatrixXd n = random_counts(41, 5, 40);
    Eigen::VectorXd e = n * random_costs(5, 41);
    FitConfig f = tight();
    f.epsilon = 1e-10;
    FitReport r = cross_validate(n, e, f, 4);
    REQUIRE(r.folds.size() == 4);
    REQUIRE(r.rounds.size() == 4);
    std::set<int> all;
    for (const auto& fold : r.folds) {
      CHECK(fold.size() >= 10);
      CHECK(fold.size() <= 11);
      for (int i : fold) CHECK(all.insert(i).second);
    }
    CHECK(all.size() == 41);
    for (const auto& m : r.rounds) {
      CHECK(m.train_cases + m.val_cases == 41);
      CHECK(m.val_nmae < 1e-3);
      CHECK(m.val_r > 0.999);
    }
    FitReport again = cross_validate(n, e, f, 4);
    CHECK(again.folds == r.folds);
    CHECK(again.models[0].cost_j == r.models[0].cost_j);
  }

  TEST_CASE("assemble aligns by case id") {
    std::vector<CaseCounts> counts{{2, {1, 2}}, {0, {3, 4}}};
    std::vector<CaseEnergy> energy{{0, 10.0}, {2, 20.0}};
    Assembled a = assemble({"A", "B"}, counts, energy);
    CHECK(a.matrix.case_ids == std::vector<int>{0, 2});
    CHECK(a.matrix.n(0, 0) == 3);
    CHECK(a.e(1) == 20.0);
    CHECK_THROWS_AS(assemble({"A", "B"}, counts, {{0, 1.0}}), DimensionError);
    CHECK_THROWS_AS(assemble({"A", "B"}, {{0, {1}}}, {{0, 1.0}}), DimensionError);
    CHECK_THROWS_AS(assemble({"A", "B"}, {}, {}), DimensionError);
  }

  TEST_CASE("model JSON round-trips") {
    CostModel m;
    m.op_ids = {"A", "B"};
    m.cost_j = {1.0 / 3.0, 2e-7};
    m.seed = 9;
    m.iterations = 12;
    m.final_j = 0.25;
    CostModel back = model_from_json(model_to_json(m, "abc"));
    CHECK(back.op_ids == m.op_ids);
    CHECK(back.cost_j == m.cost_j);
    CHECK(back.seed == 9);
  }
}
