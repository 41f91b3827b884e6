#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "rgl/ensemble.hpp"
#include "rgl/linalg.hpp"

using namespace rgl;

namespace {

double spectral_distance(const RealMatrix& a, const RealMatrix& b) {
  return oracle::spectral_norm(a - b);
}

RealMatrix second_moment(const RealMatrix& A) {
  // rows are a'/sqrt(m), so A'A = (1/m) sum_r a_r a_r'
  return oracle::from_eigen(oracle::to_eigen(A).transpose() * oracle::to_eigen(A));
}

}  // namespace

TEST_CASE("isotropic gaussian second moment approaches the identity") {
  const auto spec = DistributionSpec::isotropic_gaussian(4);
  RealMatrix avg(4, 4);
  for (int s = 0; s < 200; ++s) avg += second_moment(sample_ensemble({spec}, 8, 100 + s).A[0]);
  avg *= 1.0 / 200.0;
  CHECK(spectral_distance(avg, RealMatrix::identity(4)) < 0.5);
}

TEST_CASE("rademacher entries are +-1 after rescaling") {
  const Index m = 16;
  const auto e = sample_ensemble(std::vector<DistributionSpec>(3, DistributionSpec::rademacher(10)), m, 5);
  CHECK(e.L() == 3);
  for (const auto& a : e.A)
    for (double v : a.data()) CHECK(std::abs(std::abs(v * std::sqrt(double(m))) - 1.0) < 1e-15);
  for (Index i = 0; i < 3; ++i) {
    CHECK(e.kappa[i] == 1.0);
    CHECK(e.mu[i] == 1.0);
    CHECK(e.sigma[i] == RealMatrix::identity(10));
  }
}

TEST_CASE("sampling is deterministic per seed") {
  const std::vector<DistributionSpec> specs{DistributionSpec::isotropic_gaussian(6),
                                            DistributionSpec::ar1(6, 0.4),
                                            DistributionSpec::rademacher(6)};
  const auto a = sample_ensemble(specs, 9, 42);
  const auto b = sample_ensemble(specs, 9, 42);
  const auto c = sample_ensemble(specs, 9, 43);
  for (Index i = 0; i < 3; ++i) {
    CHECK(a.A[i] == b.A[i]);
    CHECK_FALSE(a.A[i] == c.A[i]);
  }
  CHECK(a.mu == b.mu);
}

TEST_CASE("sampling preconditions") {
  CHECK_THROWS_AS(sample_ensemble({}, 4, 1), ValidationError);
  CHECK_THROWS_AS(sample_ensemble({DistributionSpec::rademacher(4)}, 0, 1), ValidationError);
  CHECK_THROWS_AS(sample_ensemble({DistributionSpec::rademacher(4), DistributionSpec::rademacher(5)}, 4, 1),
                  ValidationError);
  CHECK_THROWS_AS(DistributionSpec::correlated_gaussian(RealMatrix{{1, 2}, {2, 1}}), ValidationError);
  CHECK_THROWS_AS(DistributionSpec::correlated_gaussian(RealMatrix{{1, 0.5}, {0.1, 1}}), ValidationError);
  CHECK_THROWS_AS(DistributionSpec::subsampled_hadamard(12), ValidationError);
}

TEST_CASE("condition number") {
  CHECK(condition_number(RealMatrix::identity(3)) == doctest::Approx(1.0));
  CHECK(condition_number(RealMatrix{{4, 0}, {0, 0.25}}) == doctest::Approx(4.0).epsilon(1e-12));
  std::mt19937_64 g(3);
  for (int t = 0; t < 10; ++t) {
    const auto b = oracle::random_matrix(5, 5, g);
    auto spd = matmul(b.transpose(), b);
    for (Index k = 0; k < 5; ++k) spd(k, k) += 0.1;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle::to_eigen(spd));
    const double ref = std::sqrt(es.eigenvalues()(4) / es.eigenvalues()(0));
    CHECK(std::abs(condition_number(spd) - ref) <= 1e-8 * ref);
  }
  CHECK_THROWS_AS(condition_number(RealMatrix{{1, 2}, {2, 1}}), ValidationError);
}

TEST_CASE("correlated gaussian normalization and cached inverse") {
  std::mt19937_64 g(8);
  for (int t = 0; t < 10; ++t) {
    const auto b = oracle::random_matrix(5, 5, g);
    auto raw = matmul(b.transpose(), b);
    for (Index k = 0; k < 5; ++k) raw(k, k) += 0.2;
    raw *= 7.0;
    const auto spec = DistributionSpec::correlated_gaussian(raw);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle::to_eigen(spec.sigma));
    CHECK(std::abs(es.eigenvalues()(0) * es.eigenvalues()(4) - 1.0) <= 1e-10);
    const auto e = sample_ensemble({spec}, 4, t);
    const auto prod = matmul(e.sigma[0], e.sigma_inv[0]);
    CHECK(norm_linf(prod - RealMatrix::identity(5)) < 1e-10);
    CHECK(e.kappa[0] >= 1.0);
    CHECK(e.mu[0] >= 1.0);
  }
  const auto ar = DistributionSpec::ar1(4, 0.5);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle::to_eigen(ar.sigma));
  CHECK(std::abs(es.eigenvalues()(0) * es.eigenvalues()(3) - 1.0) <= 1e-10);
}

TEST_CASE("second moment converges to sigma as samples grow") {
  const auto spec = DistributionSpec::ar1(4, 0.6);
  double small = 0.0, large = 0.0;
  for (int s = 0; s < 20; ++s) {
    small += spectral_distance(second_moment(sample_ensemble({spec}, 100, 500 + s).A[0]), spec.sigma);
    large += spectral_distance(second_moment(sample_ensemble({spec}, 1000, 900 + s).A[0]), spec.sigma);
  }
  CHECK(large < small);
}

TEST_CASE("incoherence estimates") {
  for (Index n : {2, 7, 33}) CHECK(estimate_incoherence(DistributionSpec::rademacher(n), 5, 1) == 1.0);
  for (Index n : {2, 8, 64}) CHECK(estimate_incoherence(DistributionSpec::subsampled_hadamard(n), 5, 1) == 1.0);
  const auto spec = DistributionSpec::isotropic_gaussian(8);
  double prev = 0.0;
  for (Index s : {1, 10, 100, 1000}) {
    const double mu = estimate_incoherence(spec, s, 77);
    CHECK(mu >= prev);
    CHECK(mu >= 1.0);
    prev = mu;
  }
  CHECK_THROWS_AS(estimate_incoherence(spec, 0, 1), ValidationError);
}

TEST_CASE("hadamard rows are flat and orthogonal") {
  const Index n = 8, m = 16;
  const auto e = sample_ensemble({DistributionSpec::subsampled_hadamard(n)}, m, 4);
  for (Index r = 0; r < m; ++r) {
    for (Index k = 0; k < n; ++k) CHECK(std::abs(std::abs(e.A[0](r, k)) * std::sqrt(double(m)) - 1.0) < 1e-15);
    for (Index q = 0; q < m; ++q) {
      double ip = 0.0;
      for (Index k = 0; k < n; ++k) ip += e.A[0](r, k) * e.A[0](q, k) * m;
      CHECK((std::abs(ip) < 1e-12 || std::abs(std::abs(ip) - double(n)) < 1e-12));
    }
  }
}

TEST_CASE("scaled and permuted ensembles") {
  const std::vector<DistributionSpec> specs{DistributionSpec::rademacher(5),
                                            DistributionSpec::isotropic_gaussian(5)};
  const auto e = sample_ensemble(specs, 6, 3);
  const auto s = e.scaled(2.0);
  CHECK(s.A[1] == e.A[1] * 2.0);
  const std::vector<Index> perm{1, 0};
  const auto p = e.permuted(perm);
  CHECK(p.A[0] == e.A[1]);
  CHECK(p.specs[0].kind == DistributionKind::isotropic_gaussian);
}

TEST_CASE("ensemble save and load") {
  const auto dir = std::filesystem::temp_directory_path() / "rgl_test_ensemble";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const std::vector<DistributionSpec> specs{DistributionSpec::ar1(4, 0.3), DistributionSpec::rademacher(4)};
  const auto e = sample_ensemble(specs, 5, 9);
  save_ensemble(dir, e);
  const auto back = load_ensemble(dir);
  CHECK(back.seed == e.seed);
  CHECK(back.A == e.A);
  CHECK(back.kappa == e.kappa);
  CHECK(back.mu == e.mu);
  CHECK(back.specs[0].kind == DistributionKind::correlated_gaussian);
  const auto meta = ensemble_metadata(e);
  CHECK(meta.at("seed").get<std::uint64_t>() == 9);
  std::filesystem::remove_all(dir);
}
