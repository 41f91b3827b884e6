#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <random>

#include "oracles.hpp"
#include "rgl/instance.hpp"
#include "rgl/linalg.hpp"

using namespace rgl;

namespace {

InstanceRequest small_request(std::uint64_t seed) {
  InstanceRequest r;
  r.n = 16;
  r.m = 12;
  r.L = 3;
  r.k_T = 2;
  r.k_per_column = {1, 2, 0};
  r.specs.assign(3, DistributionSpec::isotropic_gaussian(16));
  r.seed = seed;
  return r;
}

}  // namespace

TEST_CASE("generate_truth trivial cases") {
  const auto z = generate_truth(8, 3, 6, 0, {1, 1, 1}, MagnitudeModel::unit(), 1);
  CHECK(z.Y == RealMatrix(8, 3));
  CHECK(z.supports.k_T() == 0);
  const auto c = generate_truth(8, 3, 6, 2, {0, 0, 0}, MagnitudeModel::unit(), 1);
  CHECK(c.S == RealMatrix(6, 3));
  CHECK(c.supports.k_omega() == 0);
}

TEST_CASE("generate_truth respects supports and signs") {
  const auto g = generate_truth(20, 4, 10, 3, {2, 0, 3, 1}, MagnitudeModel::unit(), 99);
  CHECK(g.supports.k_T() == 3);
  CHECK(g.supports.k_omega() == 6);
  CHECK(nonzero_rows(g.Y, 0.0) == g.supports.row_support);
  CHECK(nonzero_entries_by_column(g.S, 0.0) == g.supports.column_support);
  for (double v : g.Y.data()) CHECK((v == 0.0 || std::abs(v) == 1.0));
  for (double v : g.S.data()) CHECK((v == 0.0 || std::abs(v) == 1.0));
  const auto lg = generate_truth(20, 4, 10, 3, {2, 0, 3, 1}, MagnitudeModel::loguniform(0.1, 10), 99);
  for (double v : lg.Y.data()) CHECK((v == 0.0 || (std::abs(v) >= 0.1 && std::abs(v) <= 10.0)));
  CHECK_THROWS_AS(generate_truth(4, 2, 5, 5, {0, 0}, MagnitudeModel::unit(), 1), ValidationError);
  CHECK_THROWS_AS(generate_truth(4, 2, 5, 1, {6, 0}, MagnitudeModel::unit(), 1), ValidationError);
  CHECK_THROWS_AS(generate_truth(4, 2, 5, 1, {1}, MagnitudeModel::unit(), 1), ValidationError);
}

TEST_CASE("row support is uniform over subsets") {
  // each of the C(4,2) = 6 subsets should appear about 1/6 of the time
  std::map<IndexSet, int> counts;
  const int draws = 6000;
  for (int s = 0; s < draws; ++s)
    ++counts[generate_truth(4, 1, 3, 2, {0}, MagnitudeModel::unit(), s).supports.row_support];
  CHECK(counts.size() == 6);
  for (const auto& [set, c] : counts) CHECK(std::abs(c - draws / 6.0) < 5 * std::sqrt(draws / 6.0));
}

TEST_CASE("signs are balanced") {
  int pos = 0, total = 0;
  for (int s = 0; s < 200; ++s) {
    const auto g = generate_truth(30, 5, 20, 4, {3, 3, 3, 3, 3}, MagnitudeModel::unit(), 1000 + s);
    for (double v : g.Y.data()) {
      if (v != 0.0) {
        ++total;
        pos += v > 0.0;
      }
    }
  }
  CHECK(std::abs(pos - total / 2.0) < 4 * std::sqrt(total / 4.0));
}

TEST_CASE("measure trivial cases and linearity") {
  const auto e = sample_ensemble(std::vector<DistributionSpec>(3, DistributionSpec::rademacher(5)), 4, 2);
  CHECK(measure(e, RealMatrix(5, 3), RealMatrix(4, 3)) == RealMatrix(4, 3));
  std::mt19937_64 g(1);
  const auto S = oracle::random_matrix(4, 3, g);
  CHECK(measure(e, RealMatrix(5, 3), S) == S);
  const auto Y1 = oracle::random_matrix(5, 3, g), Y2 = oracle::random_matrix(5, 3, g);
  const auto S1 = oracle::random_matrix(4, 3, g), S2 = oracle::random_matrix(4, 3, g);
  const auto lhs = measure(e, Y1 + Y2, S1 + S2);
  const auto rhs = measure(e, Y1, S1) + measure(e, Y2, S2);
  CHECK(norm_linf(lhs - rhs) <= 1e-12);
  CHECK_THROWS_AS(measure(e, RealMatrix(4, 3), RealMatrix(4, 3)), ValidationError);
  CHECK_THROWS_AS(measure(e, RealMatrix(5, 3), RealMatrix(5, 3)), ValidationError);
}

TEST_CASE("measure matches a hand 2x2 instance") {
  SensingEnsemble e = sample_ensemble({DistributionSpec::rademacher(2), DistributionSpec::rademacher(2)}, 2, 0);
  e.A[0] = RealMatrix{{1, 2}, {3, 4}};
  e.A[1] = RealMatrix{{0, -1}, {5, 0.5}};
  const RealMatrix Y{{1, 2}, {-1, 4}};
  const RealMatrix S{{0, 1}, {0, 0}};
  // column 0: [1-2, 3-4] ; column 1: [-4, 10+2] + S
  CHECK(measure(e, Y, S) == RealMatrix{{-1, -3}, {-1, 12}});
  CHECK(measure(e, Y, S) == oracle::naive_forward(e.A, Y) + S);
}

TEST_CASE("sparsity budget examples") {
  // m = 9600 log^2 n makes k_T_max exactly one
  const Index n = 55;
  const double l2 = std::log(double(n)) * std::log(double(n));
  const auto m = static_cast<Index>(std::ceil(9600.0 * l2));
  CHECK(sparsity_budget(n, m, 1, 1.0, 1.0).k_T_max == 1);
  CHECK(sparsity_budget(n, m - 1, 1, 1.0, 1.0).k_T_max == 0);
  CHECK(sparsity_budget(n, 3136, 1, 1.0, 1.0).k_omega_max == 1);
  CHECK(sparsity_budget(n, 3135, 1, 1.0, 1.0).k_omega_max == 0);
  CHECK(sparsity_budget(n, 8, 1, 1.0, 1.0).k_max_max == 2);
  CHECK(sparsity_budget(n, 8, 1, 1.0, 2.0).k_max_max == 1);
  CHECK(sparsity_budget(n, 8, 1, 1.0, 1.0).lambda == doctest::Approx(1.0 / std::sqrt(std::log(55.0))));
  CHECK(default_lambda(256) == doctest::Approx(1.0 / std::sqrt(std::log(256.0))));
  CHECK_THROWS_AS(sparsity_budget(n, 8, 1, 0.5, 1.0), ValidationError);
  CHECK_THROWS_AS(default_lambda(1), ValidationError);
}

TEST_CASE("corruptions are spread evenly") {
  CHECK(spread_corruptions(7, 3) == std::vector<Index>{3, 2, 2});
  CHECK(spread_corruptions(0, 2) == std::vector<Index>{0, 0});
  CHECK(spread_corruptions(4, 4) == std::vector<Index>{1, 1, 1, 1});
}

TEST_CASE("make_instance builds a consistent instance") {
  const auto inst = make_instance(small_request(5));
  inst.validate();
  CHECK(inst.M == measure(*inst.ensemble, inst.Y_true, inst.S_true));
  CHECK(inst.lambda == doctest::Approx(default_lambda(16)));
  CHECK(inst.mode == InstanceMode::free);
  const auto again = make_instance(small_request(5));
  CHECK(again.M == inst.M);
  CHECK(again.ensemble->A == inst.ensemble->A);
  const auto other = make_instance(small_request(6));
  CHECK_FALSE(other.M == inst.M);
}

TEST_CASE("theorem regime enforces the budget") {
  auto r = small_request(1);
  r.mode = InstanceMode::theorem_regime;
  CHECK_THROWS_AS(make_instance(r), ValidationError);

  // rademacher rows: mu = kappa = 1, so m = 9600 log^2 n allows k_T = 1
  InstanceRequest ok;
  ok.n = 8;
  ok.L = 2;
  ok.m = static_cast<Index>(std::ceil(9600.0 * std::pow(std::log(8.0), 2)));
  ok.k_T = 1;
  ok.k_per_column = spread_corruptions(ok.m / 3136, 2);
  ok.specs.assign(2, DistributionSpec::rademacher(8));
  ok.mode = InstanceMode::theorem_regime;
  ok.seed = 3;
  const auto inst = make_instance(ok);
  const auto b = sparsity_budget(ok.n, ok.m, ok.L, inst.ensemble->mu_max, inst.ensemble->kappa_max);
  CHECK(inst.supports.k_T() <= b.k_T_max);
  CHECK(inst.supports.k_omega() <= b.k_omega_max);
  CHECK(inst.supports.k_max() <= b.k_max_max);
  CHECK(inst.supports.k_T() * ok.L <= ok.n);
  CHECK(instance_manifest(inst).at("mode") == "theorem_regime");

  ok.k_per_column = spread_corruptions(ok.m / 3136 + 1, 2);
  CHECK_THROWS_AS(make_instance(ok), ValidationError);
}

TEST_CASE("corruption scale multiplies S only") {
  auto r = small_request(8);
  const auto base = make_instance(r);
  r.corruption_scale = 10.0;
  const auto big = make_instance(r);
  CHECK(big.S_true == base.S_true * 10.0);
  CHECK(big.Y_true == base.Y_true);
}

TEST_CASE("bundle round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "rgl_test_bundle";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  auto r = small_request(11);
  r.magnitude = MagnitudeModel::loguniform(0.1, 10.0);
  const auto inst = make_instance(r);
  save_bundle(dir, inst);
  for (const char* f : {"manifest.json", "ensemble.json", "A_0.bin", "Y_true.bin", "S_true.bin", "M.bin"})
    CHECK(std::filesystem::exists(dir / f));
  const auto back = load_bundle(dir);
  back.validate();
  CHECK(back.M == inst.M);
  CHECK(back.Y_true == inst.Y_true);
  CHECK(back.S_true == inst.S_true);
  CHECK(back.lambda == inst.lambda);
  CHECK(back.seed == inst.seed);
  CHECK(back.supports.row_support == inst.supports.row_support);
  CHECK(back.magnitude.kind == MagnitudeModel::Kind::loguniform);
  std::filesystem::remove_all(dir);
}
