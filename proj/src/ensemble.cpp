#include "rgl/ensemble.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <optional>

#include "rgl/io.hpp"
#include "rgl/linalg.hpp"
#include "rgl/rng.hpp"

namespace rgl {

namespace {

constexpr double kSymmetryTol = 1e-12;

double hadamard_entry(Index row, Index col) {
  return (std::popcount(row & col) & 1u) ? -1.0 : 1.0;
}

void check_spd(const RealMatrix& sigma) {
  if (sigma.rows() != sigma.cols()) throw ValidationError("correlation matrix must be square");
  const double scale = std::max(norm_linf(sigma), 1.0);
  for (Index i = 0; i < sigma.rows(); ++i)
    for (Index j = i + 1; j < sigma.cols(); ++j)
      if (std::abs(sigma(i, j) - sigma(j, i)) > kSymmetryTol * scale)
        throw ValidationError("correlation matrix must be symmetric");
  (void)Cholesky{sigma};  // throws if not positive definite
}

// Draws one unscaled sensing vector.
void draw_vector(const DistributionSpec& spec, const RealMatrix* chol_lower, RandomStream& rs,
                 std::vector<double>& a, std::vector<double>& z) {
  a.resize(spec.n);
  switch (spec.kind) {
    case DistributionKind::isotropic_gaussian:
      for (auto& v : a) v = rs.normal();
      break;
    case DistributionKind::rademacher_rows:
      rs.fill_signs(a);
      break;
    case DistributionKind::subsampled_orthonormal: {
      const Index row = rs.index_below(spec.n);
      for (Index k = 0; k < spec.n; ++k) a[k] = hadamard_entry(row, k);
      break;
    }
    case DistributionKind::correlated_gaussian: {
      z.resize(spec.n);
      for (auto& v : z) v = rs.normal();
      for (Index r = 0; r < spec.n; ++r) {
        double acc = 0.0;
        for (Index k = 0; k <= r; ++k) acc += (*chol_lower)(r, k) * z[k];
        a[r] = acc;
      }
      break;
    }
  }
}

double vector_incoherence(std::span<const double> a, const RealMatrix* sigma_inv) {
  double best = 0.0;
  for (double v : a) best = std::max(best, v * v);
  if (sigma_inv) {
    for (double v : matvec(*sigma_inv, a)) best = std::max(best, v * v);
  }
  return best;
}

}  // namespace

std::string to_string(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::isotropic_gaussian: return "isotropic_gaussian";
    case DistributionKind::correlated_gaussian: return "correlated_gaussian";
    case DistributionKind::rademacher_rows: return "rademacher_rows";
    case DistributionKind::subsampled_orthonormal: return "subsampled_orthonormal";
  }
  return "unknown";
}

DistributionKind distribution_kind_from_string(const std::string& name) {
  if (name == "isotropic_gaussian") return DistributionKind::isotropic_gaussian;
  if (name == "correlated_gaussian") return DistributionKind::correlated_gaussian;
  if (name == "rademacher_rows" || name == "rademacher") return DistributionKind::rademacher_rows;
  if (name == "subsampled_orthonormal" || name == "hadamard")
    return DistributionKind::subsampled_orthonormal;
  throw ValidationError("unknown distribution kind '" + name + "'");
}

DistributionSpec DistributionSpec::isotropic_gaussian(Index n) {
  DistributionSpec s;
  s.kind = DistributionKind::isotropic_gaussian;
  s.n = n;
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::rademacher(Index n) {
  DistributionSpec s;
  s.kind = DistributionKind::rademacher_rows;
  s.n = n;
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::subsampled_hadamard(Index n) {
  DistributionSpec s;
  s.kind = DistributionKind::subsampled_orthonormal;
  s.n = n;
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::correlated_gaussian(RealMatrix sigma) {
  check_spd(sigma);
  const auto eig = symmetric_eigen(sigma);
  const double lmin = eig.values.front();
  const double lmax = eig.values.back();
  sigma *= 1.0 / std::sqrt(lmax * lmin);
  DistributionSpec s;
  s.kind = DistributionKind::correlated_gaussian;
  s.n = sigma.rows();
  s.sigma = std::move(sigma);
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::ar1(Index n, double rho) {
  if (!(std::abs(rho) < 1.0)) throw ValidationError("ar1: |rho| must be < 1");
  RealMatrix sigma(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      sigma(i, j) = std::pow(rho, static_cast<double>(i > j ? i - j : j - i));
  auto s = correlated_gaussian(std::move(sigma));
  s.ar1_rho = rho;
  return s;
}

RealMatrix DistributionSpec::correlation() const {
  if (kind == DistributionKind::correlated_gaussian) return sigma;
  return RealMatrix::identity(n);
}

void DistributionSpec::validate() const {
  if (n == 0) throw ValidationError("DistributionSpec: dimension must be positive");
  if (kind == DistributionKind::subsampled_orthonormal && !std::has_single_bit(n)) {
    throw ValidationError("subsampled_orthonormal needs n to be a power of two");
  }
  if (kind == DistributionKind::correlated_gaussian) {
    if (sigma.rows() != n) throw ValidationError("correlated_gaussian: sigma dimension != n");
    check_spd(sigma);
  }
}

void SensingEnsemble::apply_sigma_inverse(Index i, std::span<double> v) const {
  if (identity_sigma(i)) return;
  const auto out = matvec(sigma_inv[i], v);
  std::copy(out.begin(), out.end(), v.begin());
}

SensingEnsemble SensingEnsemble::scaled(double c) const {
  SensingEnsemble out = *this;
  for (auto& a : out.A) a *= c;
  return out;
}

SensingEnsemble SensingEnsemble::permuted(std::span<const Index> perm) const {
  if (perm.size() != L()) throw ValidationError("permuted: permutation length != L");
  SensingEnsemble out = *this;
  for (Index k = 0; k < perm.size(); ++k) {
    const Index src = perm[k];
    out.specs[k] = specs.at(src);
    out.A[k] = A[src];
    out.sigma[k] = sigma[src];
    out.sigma_inv[k] = sigma_inv[src];
    out.kappa[k] = kappa[src];
    out.mu[k] = mu[src];
  }
  return out;
}

SensingEnsemble sample_ensemble(const std::vector<DistributionSpec>& spec_per_column,
                                Index m, std::uint64_t seed) {
  if (m == 0) throw ValidationError("sample_ensemble: m must be >= 1");
  if (spec_per_column.empty()) throw ValidationError("sample_ensemble: L must be >= 1");
  const Index n = spec_per_column.front().n;
  for (const auto& s : spec_per_column) {
    if (s.n != n) throw ValidationError("sample_ensemble: all specs must share dimension n");
    s.validate();
  }
  const Index L = spec_per_column.size();
  SensingEnsemble e;
  e.specs = spec_per_column;
  e.m = m;
  e.n = n;
  e.seed = seed;
  e.A.resize(L);
  e.sigma.resize(L);
  e.sigma_inv.resize(L);
  e.kappa.resize(L);
  e.mu.resize(L);

  const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
  const auto cols = static_cast<long>(L);
#pragma omp parallel for schedule(dynamic)
  for (long ii = 0; ii < cols; ++ii) {
    const auto i = static_cast<Index>(ii);
    const auto& spec = e.specs[i];
    e.sigma[i] = spec.correlation();
    std::optional<Cholesky> chol;
    if (!spec.identity_correlation()) {
      chol.emplace(spec.sigma);
      e.sigma_inv[i] = chol->inverse();
      e.kappa[i] = condition_number(spec.sigma);
    } else {
      e.sigma_inv[i] = RealMatrix::identity(n);
      e.kappa[i] = 1.0;
    }
    const RealMatrix* lower = chol ? &chol->lower() : nullptr;
    const RealMatrix* sinv = chol ? &e.sigma_inv[i] : nullptr;
    RealMatrix a(m, n);
    double mu_hat = 1.0;
    RandomStream rs(seed, {0xA5u, i});
    std::vector<double> v, scratch;
    for (Index r = 0; r < m; ++r) {
      draw_vector(spec, lower, rs, v, scratch);
      if (spec.kind == DistributionKind::isotropic_gaussian ||
          spec.kind == DistributionKind::correlated_gaussian) {
        mu_hat = std::max(mu_hat, vector_incoherence(v, sinv));
      }
      auto row = a.row(r);
      for (Index k = 0; k < n; ++k) row[k] = v[k] * inv_sqrt_m;
    }
    e.A[i] = std::move(a);
    e.mu[i] = mu_hat;
  }
  e.kappa_max = *std::max_element(e.kappa.begin(), e.kappa.end());
  e.mu_max = *std::max_element(e.mu.begin(), e.mu.end());
  return e;
}

double condition_number(const RealMatrix& sigma) {
  check_spd(sigma);
  const auto eig = symmetric_eigen(sigma);
  const double lmin = eig.values.front();
  const double lmax = eig.values.back();
  if (!(lmin > 0.0)) throw ValidationError("condition_number: matrix is not positive definite");
  return std::max(1.0, std::sqrt(lmax / lmin));
}

double estimate_incoherence(const DistributionSpec& spec, Index samples, std::uint64_t seed) {
  if (samples == 0) throw ValidationError("estimate_incoherence: samples must be >= 1");
  spec.validate();
  switch (spec.kind) {
    case DistributionKind::rademacher_rows:
      return 1.0;
    case DistributionKind::subsampled_orthonormal: {
      // Exhaustive over the n possible rows; Sigma = I so the Sigma^-1 term equals the first.
      double best = 0.0;
      for (Index row = 0; row < spec.n; ++row)
        for (Index k = 0; k < spec.n; ++k) {
          const double h = hadamard_entry(row, k);
          best = std::max(best, h * h);
        }
      return best;
    }
    default:
      break;
  }
  std::optional<Cholesky> chol;
  RealMatrix sinv;
  if (!spec.identity_correlation()) {
    chol.emplace(spec.sigma);
    sinv = chol->inverse();
  }
  RandomStream rs(seed, {0x1Cu});
  double best = 0.0;
  std::vector<double> v, scratch;
  for (Index s = 0; s < samples; ++s) {
    draw_vector(spec, chol ? &chol->lower() : nullptr, rs, v, scratch);
    best = std::max(best, vector_incoherence(v, chol ? &sinv : nullptr));
  }
  return std::max(best, 1.0);
}

nlohmann::json spec_to_json(const DistributionSpec& spec) {
  nlohmann::json j{{"kind", to_string(spec.kind)}, {"n", spec.n}};
  if (spec.kind == DistributionKind::correlated_gaussian) {
    if (spec.ar1_rho != 0.0) j["ar1_rho"] = spec.ar1_rho;
    j["sigma"] = std::vector<double>(spec.sigma.data().begin(), spec.sigma.data().end());
  }
  return j;
}

DistributionSpec spec_from_json(const nlohmann::json& j) {
  const auto kind = distribution_kind_from_string(j.at("kind").get<std::string>());
  const Index n = j.at("n").get<Index>();
  switch (kind) {
    case DistributionKind::isotropic_gaussian: return DistributionSpec::isotropic_gaussian(n);
    case DistributionKind::rademacher_rows: return DistributionSpec::rademacher(n);
    case DistributionKind::subsampled_orthonormal: return DistributionSpec::subsampled_hadamard(n);
    case DistributionKind::correlated_gaussian: {
      if (j.contains("sigma")) {
        auto s = DistributionSpec::correlated_gaussian(
            RealMatrix(n, n, j.at("sigma").get<std::vector<double>>()));
        s.ar1_rho = j.value("ar1_rho", 0.0);
        return s;
      }
      return DistributionSpec::ar1(n, j.at("ar1_rho").get<double>());
    }
  }
  throw ValidationError("spec_from_json: unreachable");
}

nlohmann::json ensemble_metadata(const SensingEnsemble& e) {
  nlohmann::json specs = nlohmann::json::array();
  for (const auto& s : e.specs) specs.push_back(spec_to_json(s));
  return {
      {"seed", e.seed},
      {"rng", kRngAlgorithm},
      {"m", e.m},
      {"n", e.n},
      {"L", e.L()},
      {"specs", specs},
      {"kappa", e.kappa},
      {"mu_hat", e.mu},
      {"kappa_max", e.kappa_max},
      {"mu_max", e.mu_max},
  };
}

void save_ensemble(const std::filesystem::path& dir, const SensingEnsemble& e) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "ensemble.json") << ensemble_metadata(e).dump(2) << '\n';
  for (Index i = 0; i < e.L(); ++i) {
    io::save_binary(dir / ("A_" + std::to_string(i) + ".bin"), e.A[i]);
  }
}

SensingEnsemble load_ensemble(const std::filesystem::path& dir) {
  std::ifstream is(dir / "ensemble.json");
  if (!is) throw io::FormatError("missing " + (dir / "ensemble.json").string());
  const auto meta = nlohmann::json::parse(is);
  SensingEnsemble e;
  e.seed = meta.at("seed").get<std::uint64_t>();
  e.m = meta.at("m").get<Index>();
  e.n = meta.at("n").get<Index>();
  for (const auto& s : meta.at("specs")) e.specs.push_back(spec_from_json(s));
  e.kappa = meta.at("kappa").get<std::vector<double>>();
  e.mu = meta.at("mu_hat").get<std::vector<double>>();
  e.kappa_max = meta.at("kappa_max").get<double>();
  e.mu_max = meta.at("mu_max").get<double>();
  const Index L = meta.at("L").get<Index>();
  for (Index i = 0; i < L; ++i) {
    auto a = io::load_binary(dir / ("A_" + std::to_string(i) + ".bin"));
    if (a.rows() != e.m || a.cols() != e.n) {
      throw io::FormatError("ensemble: A_" + std::to_string(i) + " has wrong shape");
    }
    e.A.push_back(std::move(a));
    const auto& spec = e.specs.at(i);
    e.sigma.push_back(spec.correlation());
    e.sigma_inv.push_back(spec.identity_correlation() ? RealMatrix::identity(e.n)
                                                      : Cholesky(spec.sigma).inverse());
  }
  return e;
}

}  // namespace rgl
