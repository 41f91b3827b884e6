#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "rgl/ensemble.hpp"
#include "rgl/support.hpp"

namespace rgl {

struct MagnitudeModel {
  enum class Kind { unit, loguniform } kind = Kind::unit;
  double low = 0.1;
  double high = 10.0;

  static MagnitudeModel unit() { return {}; }
  static MagnitudeModel loguniform(double low, double high) {
    return {Kind::loguniform, low, high};
  }
};

enum class InstanceMode { free, theorem_regime };

std::string to_string(InstanceMode mode);

struct GroundTruth {
  RealMatrix Y;  // n x L
  RealMatrix S;  // m x L
  SupportPattern supports;
};

/// Draws T uniformly among k_T-subsets and Omega_i uniformly per column;
/// entries on the supports are (uniform sign) * magnitude.
GroundTruth generate_truth(Index n, Index L, Index m, Index k_T,
                           const std::vector<Index>& k_per_column,
                           const MagnitudeModel& magnitude, std::uint64_t seed);

/// M = [A_(1) y_1, ..., A_(L) y_L] + S.
RealMatrix measure(const SensingEnsemble& ensemble, const RealMatrix& Y, const RealMatrix& S);

struct SparsityBudget {
  Index k_T_max = 0;
  Index k_omega_max = 0;
  Index k_max_max = 0;
  double lambda = 0.0;
};

// alpha = 1/9600, beta = 1/3136, gamma = 1/4, kept as divisors so that
// m = 3136 gives exactly one corruption.
inline constexpr double kAlphaInv = 9600.0;
inline constexpr double kBetaInv = 3136.0;
inline constexpr double kGammaInv = 4.0;

/// Sparsity limits of the recovery guarantee, natural logarithms throughout.
SparsityBudget sparsity_budget(Index n, Index m, Index L, double mu_max, double kappa_max);

/// lambda = 1 / sqrt(log n).
double default_lambda(Index n);

/// Equal per-column corruption counts summing as closely as possible to
/// `k_omega` (earlier columns receive the remainder).
std::vector<Index> spread_corruptions(Index k_omega, Index L);

struct ProblemInstance {
  std::shared_ptr<const SensingEnsemble> ensemble;
  RealMatrix Y_true;
  RealMatrix S_true;
  RealMatrix M;
  SupportPattern supports;
  double lambda = 0.0;
  InstanceMode mode = InstanceMode::free;
  std::uint64_t seed = 0;
  MagnitudeModel magnitude;

  /// Checks the measurement identity and support invariants.
  void validate() const;
};

struct InstanceRequest {
  Index n = 0;
  Index m = 0;
  Index L = 0;
  Index k_T = 0;
  std::vector<Index> k_per_column;
  std::vector<DistributionSpec> specs;  // one per column
  MagnitudeModel magnitude;
  InstanceMode mode = InstanceMode::free;
  double lambda = 0.0;  // <= 0 selects default_lambda(n)
  double corruption_scale = 1.0;
  std::uint64_t seed = 0;
};

/// Samples the ensemble and truth from `seed`, forms M. In theorem-regime mode
/// the request must respect the sparsity budget and k_T * L <= n.
ProblemInstance make_instance(const InstanceRequest& req);

/// Same as above but reuses an existing ensemble.
ProblemInstance make_instance(std::shared_ptr<const SensingEnsemble> ensemble,
                              const InstanceRequest& req);

nlohmann::json instance_manifest(const ProblemInstance& inst);

/// Bundle layout: manifest.json, ensemble.json, A_<i>.bin, Y_true.bin,
/// S_true.bin, M.bin.
void save_bundle(const std::filesystem::path& dir, const ProblemInstance& inst);
ProblemInstance load_bundle(const std::filesystem::path& dir);

}  // namespace rgl
