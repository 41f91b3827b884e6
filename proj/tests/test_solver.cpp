#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rgl/certificate.hpp"
#include "rgl/instance.hpp"
#include "rgl/solver.hpp"

using namespace rgl;

namespace {

ProblemInstance desk_instance(std::uint64_t seed) {
  InstanceRequest r;
  r.n = 64;
  r.m = 48;
  r.L = 3;
  r.k_T = 2;
  r.k_per_column = {2, 2, 2};
  r.specs.assign(3, DistributionSpec::rademacher(64));
  r.seed = seed;
  return make_instance(r);
}

ProblemInstance tiny_instance(Index n, Index m, Index L, Index k_T, Index k, std::uint64_t seed) {
  InstanceRequest r;
  r.n = n;
  r.m = m;
  r.L = L;
  r.k_T = k_T;
  r.k_per_column.assign(L, k);
  r.specs.assign(L, DistributionSpec::isotropic_gaussian(n));
  r.seed = seed;
  return make_instance(r);
}

std::vector<int> as_ints(const IndexSet& s) { return {s.begin(), s.end()}; }

double combined_gap(const SolverReport& r, const RealMatrix& M, const SensingEnsemble& e) {
  return norm_fro(M - oracle::naive_forward(e.A, r.Y_hat));
}

}  // namespace

TEST_CASE("prox_group_soft examples") {
  const std::vector<double> row{3, 4};
  CHECK(prox_group_soft(row, 5) == std::vector<double>{0, 0});
  CHECK(prox_group_soft(row, 0) == std::vector<double>{3, 4});
  CHECK_THROWS_AS(prox_group_soft(row, -1), ValidationError);

  // radial oracle: minimize 2.5 r + (r - 5)^2 / 2 over a fine grid of r
  double best_r = 0.0, best_f = 1e300;
  for (int k = 0; k <= 500000; ++k) {
    const double r = 5.0 * k / 500000.0;
    const double f = 2.5 * r + 0.5 * (r - 5.0) * (r - 5.0);
    if (f < best_f) {
      best_f = f;
      best_r = r;
    }
  }
  const auto out = prox_group_soft(row, 2.5);
  CHECK(std::abs(out[0] - 0.6 * best_r) < 1e-5);
  CHECK(std::abs(out[1] - 0.8 * best_r) < 1e-5);
  CHECK(out[0] == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(out[1] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("prox_soft examples") {
  CHECK(prox_soft(5, 2) == 3);
  CHECK(prox_soft(-1, 2) == 0);
  CHECK(prox_soft(-5, 2) == -3);
  std::mt19937_64 g(2);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 100; ++t) {
    const double x = nd(g);
    CHECK(prox_soft(x, 0) == x);
  }
  CHECK_THROWS_AS(prox_soft(1, -0.5), ValidationError);
}

TEST_CASE("prox operators are nonexpansive") {
  std::mt19937_64 g(4);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 3.0);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> a(4), b(4);
    for (auto& v : a) v = 2 * nd(g);
    for (auto& v : b) v = 2 * nd(g);
    const double th = ud(g);
    const auto pa = prox_group_soft(a, th), pb = prox_group_soft(b, th);
    double dp = 0.0, dab = 0.0;
    for (int k = 0; k < 4; ++k) {
      dp += (pa[k] - pb[k]) * (pa[k] - pb[k]);
      dab += (a[k] - b[k]) * (a[k] - b[k]);
    }
    CHECK(dp <= dab * (1 + 1e-12));
    CHECK(std::abs(prox_soft(a[0], th) - prox_soft(b[0], th)) <= std::abs(a[0] - b[0]) * (1 + 1e-12));
  }
}

TEST_CASE("zero data gives the zero solution for every program") {
  const auto e = sample_ensemble(std::vector<DistributionSpec>(2, DistributionSpec::rademacher(6)), 5, 1);
  const RealMatrix M(5, 2);
  for (const auto& r : {solve_rgl(M, e, 0.5), solve_l21_equality(M, e), solve_group_lasso(M, e, 10.0)}) {
    CHECK(r.converged);
    CHECK(r.Y_hat == RealMatrix(6, 2));
    CHECK(r.S_hat == RealMatrix(5, 2));
    CHECK(r.objective == 0.0);
  }
}

TEST_CASE("dense clean case matches the pseudoinverse solution") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto inst = tiny_instance(6, 10, 1, 6, 0, 30 + s);
    const auto rep = solve_rgl(inst.M, *inst.ensemble, 50.0);
    CHECK(rep.converged);
    const Eigen::MatrixXd A = oracle::to_eigen(inst.ensemble->A[0]);
    const Eigen::VectorXd y = A.completeOrthogonalDecomposition().pseudoInverse() * oracle::to_eigen(inst.M);
    CHECK((oracle::to_eigen(rep.Y_hat) - y).norm() <= 1e-5);
  }
}

TEST_CASE("desk instance is recovered after its truth is certified optimal") {
  int certified = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto inst = desk_instance(100 + s);
    const auto V_bar = row_normalized_truth(inst.Y_true, inst.supports);
    const auto sgn = sign_matrix(inst.S_true);
    const auto W = oracle::from_eigen(oracle::least_norm_dual(oracle::to_eigen(inst.ensemble->A),
                                                              as_ints(inst.supports.row_support),
                                                              oracle::to_eigen(inst.S_true),
                                                              oracle::to_eigen(V_bar), inst.lambda));
    if (!all_pass(verify_exact_dual(W, *inst.ensemble, inst.supports, V_bar, sgn, inst.lambda))) continue;
    ++certified;
    const auto rep = solve_rgl(inst.M, *inst.ensemble, inst.lambda);
    CHECK(rep.converged);
    const auto rc = check_exact_recovery(rep, inst.Y_true, inst.S_true, 1e-4);
    CHECK(rc.success);
    CHECK(rc.support_match);
  }
  CHECK(certified >= 1);
}

TEST_CASE("feasibility and objective at convergence") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto inst = desk_instance(200 + s);
    SolverOptions o;
    o.record_history = true;
    const auto rep = solve_rgl(inst.M, *inst.ensemble, inst.lambda, o);
    REQUIRE(rep.converged);
    const auto resid = inst.M - oracle::naive_forward(inst.ensemble->A, rep.Y_hat) - rep.S_hat;
    CHECK(norm_fro(resid) <= o.tol_primal);
    CHECK(std::abs(rep.primal_residual - norm_fro(resid)) <= 1e-12);
    const double obj = oracle::l21(oracle::to_eigen(rep.Y_hat)) +
                       inst.lambda * oracle::to_eigen(rep.S_hat).cwiseAbs().sum();
    CHECK(std::abs(rep.objective - obj) <= 1e-10);
    REQUIRE(rep.residual_history.size() == std::size_t(rep.iterations));
    CHECK(rep.residual_history.back() <= rep.residual_history[rep.iterations / 2]);
  }
}

TEST_CASE("hitting max_iters is reported") {
  const auto inst = desk_instance(7);
  SolverOptions o;
  o.max_iters = 3;
  const auto rep = solve_rgl(inst.M, *inst.ensemble, inst.lambda, o);
  CHECK_FALSE(rep.converged);
  CHECK(rep.iterations == 3);
  SolverOptions bad;
  bad.over_relaxation = 2.0;
  CHECK_THROWS_AS(solve_rgl(inst.M, *inst.ensemble, inst.lambda, bad), ValidationError);
  bad = {};
  bad.tol_primal = 0.0;
  CHECK_THROWS_AS(solve_rgl(inst.M, *inst.ensemble, inst.lambda, bad), ValidationError);
  CHECK_THROWS_AS(solve_rgl(inst.M, *inst.ensemble, 0.0), ValidationError);
  CHECK_THROWS_AS(solve_group_lasso(inst.M, *inst.ensemble, -1.0), ValidationError);
  CHECK_THROWS_AS(solve_rgl(RealMatrix(47, 3), *inst.ensemble, 1.0), ValidationError);
}

TEST_CASE("objective matches the subgradient oracle on tiny instances") {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto inst = tiny_instance(6, 8, 2, 2, 1, 300 + s);
    SolverOptions o;
    o.tol_primal = o.tol_dual = 1e-10;
    const auto rep = solve_rgl(inst.M, *inst.ensemble, inst.lambda, o);
    CHECK(rep.converged);
    const auto A = oracle::to_eigen(inst.ensemble->A);
    const double best = oracle::rgl_subgradient_optimum(A, oracle::to_eigen(inst.M), inst.lambda, 1'000'000, 5, s);
    CHECK(rep.objective <= best + 1e-6);
  }
}

TEST_CASE("group lasso matches a long proximal gradient run") {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto inst = tiny_instance(5, 4, 2, 2, 0, 400 + s);
    const double gamma = 2.0;
    SolverOptions o;
    o.tol_primal = o.tol_dual = 1e-11;
    const auto rep = solve_group_lasso(inst.M, *inst.ensemble, gamma, o);
    CHECK(rep.converged);
    const auto A = oracle::to_eigen(inst.ensemble->A);
    const Eigen::MatrixXd M = oracle::to_eigen(inst.M);
    const Eigen::MatrixXd Y = oracle::group_lasso_ista(A, M, gamma, 1'000'000);
    const double ref = oracle::l21(Y) + gamma * (M - oracle::forward(A, Y)).squaredNorm();
    const double mine = oracle::l21(oracle::to_eigen(rep.Y_hat)) +
                        gamma * (M - oracle::forward(A, oracle::to_eigen(rep.Y_hat))).squaredNorm();
    CHECK(std::abs(mine - ref) <= 1e-6);
    CHECK(std::abs(rep.objective - mine) <= 1e-6);
  }
}

TEST_CASE("group lasso feasibility gap shrinks as gamma grows") {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto inst = desk_instance(500 + s);
    const auto clean = inst.M - inst.S_true;
    double prev = 1e300;
    for (double gamma : {1e2, 1e4, 1e6}) {
      const auto rep = solve_group_lasso(clean, *inst.ensemble, gamma);
      CHECK(rep.converged);
      const double gap = combined_gap(rep, clean, *inst.ensemble);
      CHECK(gap < prev);
      prev = gap;
    }
  }
}

TEST_CASE("l21 equality baseline") {
  int worse = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto inst = desk_instance(600 + s);
    const auto rgl_rep = solve_rgl(inst.M, *inst.ensemble, inst.lambda);
    const auto l21_rep = solve_l21_equality(inst.M, *inst.ensemble);
    CHECK(l21_rep.converged);
    CHECK(l21_rep.S_hat == RealMatrix(48, 3));
    const auto a = check_exact_recovery(rgl_rep, inst.Y_true, inst.S_true);
    const auto b = check_exact_recovery(l21_rep, inst.Y_true, inst.S_true);
    worse += b.rel_err_Y > a.rel_err_Y;

    // clean data: the equality program recovers the row-sparse truth
    const auto clean = inst.M - inst.S_true;
    const auto c = solve_l21_equality(clean, *inst.ensemble);
    CHECK(check_exact_recovery(c, inst.Y_true, RealMatrix(48, 3), 1e-4).success);
  }
  CHECK(worse == 5);
}

TEST_CASE("check_exact_recovery boundaries") {
  const auto inst = desk_instance(9);
  SolverReport r;
  r.Y_hat = inst.Y_true;
  r.S_hat = inst.S_true;
  auto rc = check_exact_recovery(r, inst.Y_true, inst.S_true);
  CHECK(rc.success);
  CHECK(rc.rel_err_Y == 0.0);
  CHECK(rc.rel_err_S == 0.0);
  CHECK(rc.support_match);

  const double tol = 1e-3;
  const Index row = inst.supports.row_support.front();
  const double scale = std::max(1.0, norm_fro(inst.Y_true));
  r.Y_hat(row, 0) += 10 * tol * scale;
  CHECK_FALSE(check_exact_recovery(r, inst.Y_true, inst.S_true, tol).success);

  // error exactly at the tolerance with dyadic numbers: inclusive
  SolverReport b;
  b.Y_hat = RealMatrix{{1.0, 0.0}, {0.0, 0.0}};
  b.S_hat = RealMatrix(2, 2);
  const RealMatrix Yt{{1.0, 0.0}, {0.0, 0.0}};
  b.Y_hat(1, 1) = 0.125;
  CHECK(check_exact_recovery(b, Yt, RealMatrix(2, 2), 0.125).success);
  CHECK_FALSE(check_exact_recovery(b, Yt, RealMatrix(2, 2), 0.124).success);
  CHECK_THROWS_AS(check_exact_recovery(b, Yt, RealMatrix(2, 2), 0.0), ValidationError);
}

TEST_CASE("solution is invariant under column permutation") {
  const auto inst = desk_instance(700);
  const std::vector<Index> perm{2, 0, 1};
  const auto pe = inst.ensemble->permuted(perm);
  RealMatrix pM(inst.M.rows(), 3);
  for (Index k = 0; k < 3; ++k)
    for (Index r = 0; r < inst.M.rows(); ++r) pM(r, k) = inst.M(r, perm[k]);
  const auto a = solve_rgl(inst.M, *inst.ensemble, inst.lambda);
  const auto b = solve_rgl(pM, pe, inst.lambda);
  CHECK(a.iterations == b.iterations);
  bool exact = true;
  for (Index k = 0; k < 3; ++k)
    for (Index r = 0; r < a.Y_hat.rows(); ++r) exact = exact && b.Y_hat(r, k) == a.Y_hat(r, perm[k]);
  CHECK(exact);
}

TEST_CASE("repeated solves are bit-identical") {
  const auto inst = desk_instance(800);
  const auto a = solve_rgl(inst.M, *inst.ensemble, inst.lambda);
  const auto b = solve_rgl(inst.M, *inst.ensemble, inst.lambda);
  CHECK(a.Y_hat == b.Y_hat);
  CHECK(a.S_hat == b.S_hat);
  CHECK(report_to_json(a).dump() == report_to_json(b).dump());
}
