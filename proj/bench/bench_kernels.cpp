// Serial against OpenMP kernels, plus the trial pool at 1 and max threads.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "rgl/experiments.hpp"
#include "rgl/kernels.hpp"
#include "rgl/rng.hpp"

using namespace rgl;

namespace {

double time_it(int reps, const std::function<void()>& f) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

RealMatrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  RandomStream rs(seed);
  RealMatrix a(rows, cols);
  for (auto& v : a.data()) v = rs.normal();
  return a;
}

}  // namespace

int main(int argc, char** argv) {
  const Index n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 256;
  const Index m = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 128;
  const Index L = argc > 3 ? std::strtoul(argv[3], nullptr, 10) : 8;
  const int reps = 20;

  MatrixList A;
  for (Index i = 0; i < L; ++i) A.push_back(random_matrix(m, n, 10 + i));
  const RealMatrix Y = random_matrix(n, L, 1);
  const RealMatrix W = random_matrix(m, L, 2);

  std::printf("threads available: %d\n", max_threads());
  std::printf("%-10s %12s %12s %8s\n", "kernel", "serial_s", "parallel_s", "equal");
  const auto fs = serial::forward(A, Y), fp = parallel::forward(A, Y);
  std::printf("%-10s %12.6f %12.6f %8s\n", "forward",
              time_it(reps, [&] { (void)serial::forward(A, Y); }),
              time_it(reps, [&] { (void)parallel::forward(A, Y); }), fs == fp ? "yes" : "no");
  const auto as = serial::adjoint(A, W), ap = parallel::adjoint(A, W);
  std::printf("%-10s %12.6f %12.6f %8s\n", "adjoint",
              time_it(reps, [&] { (void)serial::adjoint(A, W); }),
              time_it(reps, [&] { (void)parallel::adjoint(A, W); }), as == ap ? "yes" : "no");
  const auto gs = serial::gram(A[0]), gp = parallel::gram(A[0]);
  std::printf("%-10s %12.6f %12.6f %8s\n", "gram", time_it(3, [&] { (void)serial::gram(A[0]); }),
              time_it(3, [&] { (void)parallel::gram(A[0]); }), gs == gp ? "yes" : "no");

  ExperimentConfig cfg;
  cfg.n = 64;
  cfg.m = 32;
  cfg.L = 4;
  cfg.trials = 8;
  cfg.k_T_values = {2};
  cfg.corruption_counts = {1};
  RunOptions one;
  one.threads = 1;
  RunOptions many;
  many.threads = max_threads();
  std::vector<CellResult> r1, rn;
  const double t1 = time_it(1, [&] { r1 = run_phase_transition(cfg, one); });
  const double tn = time_it(1, [&] { rn = run_phase_transition(cfg, many); });
  std::printf("%-10s %12.6f %12.6f %8s\n", "trials", t1, tn,
              r1.front().mean_rel_err_Y == rn.front().mean_rel_err_Y ? "yes" : "no");
  return 0;
}
