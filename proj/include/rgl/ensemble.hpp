#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rgl/kernels.hpp"
#include "rgl/matrix.hpp"

namespace rgl {

enum class DistributionKind {
  isotropic_gaussian,
  correlated_gaussian,
  rademacher_rows,
  subsampled_orthonormal,
};

std::string to_string(DistributionKind kind);
DistributionKind distribution_kind_from_string(const std::string& name);

/// Distribution of one sensing vector a_(i) in R^n.
///
/// For `correlated_gaussian` the stored correlation is already rescaled so
/// that lambda_max * lambda_min = 1. `subsampled_orthonormal` draws rows of
/// the n x n Sylvester-Hadamard matrix uniformly with replacement, which
/// needs n to be a power of two.
struct DistributionSpec {
  DistributionKind kind = DistributionKind::rademacher_rows;
  Index n = 0;
  RealMatrix sigma;        // only for correlated_gaussian
  double ar1_rho = 0.0;    // provenance when sigma came from `ar1`

  static DistributionSpec isotropic_gaussian(Index n);
  static DistributionSpec rademacher(Index n);
  static DistributionSpec subsampled_hadamard(Index n);
  /// Validates symmetry and definiteness, then normalizes the scale.
  static DistributionSpec correlated_gaussian(RealMatrix sigma);
  /// Correlated Gaussian with Toeplitz correlation rho^|j-k|.
  static DistributionSpec ar1(Index n, double rho);

  bool identity_correlation() const { return kind != DistributionKind::correlated_gaussian; }
  /// Population correlation matrix E[a a'] of the distribution.
  RealMatrix correlation() const;
  void validate() const;
};

/// L sensing matrices with rows a'_(i)r / sqrt(m) plus population metadata.
struct SensingEnsemble {
  std::vector<DistributionSpec> specs;
  Index m = 0;
  Index n = 0;
  MatrixList A;
  MatrixList sigma;
  MatrixList sigma_inv;
  std::vector<double> kappa;
  std::vector<double> mu;
  double kappa_max = 1.0;
  double mu_max = 1.0;
  std::uint64_t seed = 0;

  Index L() const { return A.size(); }
  bool identity_sigma(Index i) const { return specs[i].identity_correlation(); }
  /// v <- Sigma_(i)^{-1} v (no-op for identity correlation).
  void apply_sigma_inverse(Index i, std::span<double> v) const;

  /// Same ensemble with every sensing matrix multiplied by `c`.
  SensingEnsemble scaled(double c) const;
  /// Columns reordered so that new column k is old column perm[k].
  SensingEnsemble permuted(std::span<const Index> perm) const;
};

/// Fills A_(i) from one stream derived from (seed, i), so each
/// column is independent of the thread that fills it.
SensingEnsemble sample_ensemble(const std::vector<DistributionSpec>& spec_per_column,
                                Index m, std::uint64_t seed);

/// sqrt(lambda_max / lambda_min) of a symmetric positive definite matrix.
double condition_number(const RealMatrix& sigma);

/// Empirical incoherence: max over `samples` nested draws of
/// max(max_k <a, e_k>^2, max_k <Sigma^{-1} a, e_k>^2). Exact (= 1) for the
/// bounded families.
double estimate_incoherence(const DistributionSpec& spec, Index samples, std::uint64_t seed);

nlohmann::json spec_to_json(const DistributionSpec& spec);
DistributionSpec spec_from_json(const nlohmann::json& j);

/// Seed, specs, kappa_i and mu_i (matrices are not included).
nlohmann::json ensemble_metadata(const SensingEnsemble& e);

/// Writes `ensemble.json` plus `A_<i>.bin` files into `dir`.
void save_ensemble(const std::filesystem::path& dir, const SensingEnsemble& e);
SensingEnsemble load_ensemble(const std::filesystem::path& dir);

}  // namespace rgl
