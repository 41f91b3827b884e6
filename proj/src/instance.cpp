#include "rgl/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "rgl/io.hpp"
#include "rgl/kernels.hpp"
#include "rgl/linalg.hpp"
#include "rgl/rng.hpp"

namespace rgl {

namespace {

double draw_magnitude(const MagnitudeModel& mm, RandomStream& rs) {
  if (mm.kind == MagnitudeModel::Kind::unit) return 1.0;
  const double lo = std::log(mm.low);
  const double hi = std::log(mm.high);
  return std::exp(lo + (hi - lo) * rs.uniform());
}

nlohmann::json magnitude_json(const MagnitudeModel& mm) {
  if (mm.kind == MagnitudeModel::Kind::unit) return {{"kind", "unit"}};
  return {{"kind", "loguniform"}, {"low", mm.low}, {"high", mm.high}};
}

MagnitudeModel magnitude_from_json(const nlohmann::json& j) {
  if (j.at("kind").get<std::string>() == "unit") return MagnitudeModel::unit();
  return MagnitudeModel::loguniform(j.at("low").get<double>(), j.at("high").get<double>());
}

}  // namespace

std::string to_string(InstanceMode mode) {
  return mode == InstanceMode::theorem_regime ? "theorem_regime" : "free";
}

GroundTruth generate_truth(Index n, Index L, Index m, Index k_T,
                           const std::vector<Index>& k_per_column,
                           const MagnitudeModel& magnitude, std::uint64_t seed) {
  if (k_T > n) throw ValidationError("generate_truth: k_T exceeds n");
  if (k_per_column.size() != L) throw ValidationError("generate_truth: need one corruption count per column");
  for (Index k : k_per_column)
    if (k > m) throw ValidationError("generate_truth: corruption count exceeds m");
  if (magnitude.kind == MagnitudeModel::Kind::loguniform &&
      !(magnitude.low > 0.0 && magnitude.high >= magnitude.low)) {
    throw ValidationError("generate_truth: loguniform bounds must satisfy 0 < low <= high");
  }

  RandomStream support_rs(seed, {0x7u});
  IndexSet T = support_rs.subset(n, k_T);
  std::vector<IndexSet> omega(L);
  for (Index i = 0; i < L; ++i) omega[i] = support_rs.subset(m, k_per_column[i]);

  GroundTruth gt{RealMatrix(n, L), RealMatrix(m, L),
                 SupportPattern::build(n, m, T, omega)};
  RandomStream value_rs(seed, {0x8u});
  for (Index r : gt.supports.row_support)
    for (Index i = 0; i < L; ++i) gt.Y(r, i) = value_rs.sign() * draw_magnitude(magnitude, value_rs);
  for (Index i = 0; i < L; ++i)
    for (Index r : gt.supports.column_support[i])
      gt.S(r, i) = value_rs.sign() * draw_magnitude(magnitude, value_rs);
  gt.supports.validate();
  return gt;
}

RealMatrix measure(const SensingEnsemble& ensemble, const RealMatrix& Y, const RealMatrix& S) {
  if (Y.rows() != ensemble.n || Y.cols() != ensemble.L()) {
    throw ValidationError("measure: Y must be n x L");
  }
  if (S.rows() != ensemble.m || S.cols() != ensemble.L()) {
    throw ValidationError("measure: S must be m x L");
  }
  RealMatrix M = serial::forward(ensemble.A, Y);
  M += S;
  return M;
}

double default_lambda(Index n) {
  if (n < 2) throw ValidationError("default_lambda: need n >= 2 so that log n > 0");
  return 1.0 / std::sqrt(std::log(static_cast<double>(n)));
}

SparsityBudget sparsity_budget(Index n, Index m, Index L, double mu_max, double kappa_max) {
  if (n < 1 || m < 1 || L < 1 || mu_max < 1.0 || kappa_max < 1.0) {
    throw ValidationError("sparsity_budget: all inputs must be >= 1");
  }
  const double log_n = std::log(static_cast<double>(n));
  const double md = static_cast<double>(m);
  SparsityBudget b;
  b.k_T_max = log_n > 0.0
                  ? static_cast<Index>(std::floor(md / (kAlphaInv * mu_max * kappa_max * log_n * log_n)))
                  : 0;
  b.k_omega_max = static_cast<Index>(std::floor(md / (kBetaInv * mu_max)));
  b.k_max_max = static_cast<Index>(std::floor(md / (kGammaInv * kappa_max)));
  b.lambda = log_n > 0.0 ? 1.0 / std::sqrt(log_n) : 0.0;
  return b;
}

std::vector<Index> spread_corruptions(Index k_omega, Index L) {
  std::vector<Index> out(L, k_omega / L);
  for (Index i = 0; i < k_omega % L; ++i) ++out[i];
  return out;
}

void ProblemInstance::validate() const {
  if (!ensemble) throw ValidationError("ProblemInstance: missing ensemble");
  supports.validate();
  const Index n = ensemble->n;
  const Index m = ensemble->m;
  const Index L = ensemble->L();
  if (Y_true.rows() != n || Y_true.cols() != L || S_true.rows() != m || S_true.cols() != L ||
      M.rows() != m || M.cols() != L) {
    throw ValidationError("ProblemInstance: shape mismatch");
  }
  const auto off_rows = supports.row_complement();
  for (Index r : off_rows)
    for (Index i = 0; i < L; ++i)
      if (Y_true(r, i) != 0.0) throw ValidationError("ProblemInstance: Y_true nonzero outside T");
  if (project_entries_complement(S_true, supports.column_support) != RealMatrix(m, L)) {
    throw ValidationError("ProblemInstance: S_true nonzero outside Omega");
  }
  if (measure(*ensemble, Y_true, S_true) != M) {
    throw ValidationError("ProblemInstance: M differs from [A y] + S");
  }
  if (!(lambda > 0.0)) throw ValidationError("ProblemInstance: lambda must be positive");
}

ProblemInstance make_instance(const InstanceRequest& req) {
  if (req.specs.size() != req.L) throw ValidationError("make_instance: need one spec per column");
  auto ens = std::make_shared<const SensingEnsemble>(
      sample_ensemble(req.specs, req.m, derive_seed(req.seed, {1})));
  return make_instance(std::move(ens), req);
}

ProblemInstance make_instance(std::shared_ptr<const SensingEnsemble> ensemble,
                              const InstanceRequest& req) {
  if (ensemble->n != req.n || ensemble->m != req.m || ensemble->L() != req.L) {
    throw ValidationError("make_instance: ensemble shape differs from request");
  }
  if (req.mode == InstanceMode::theorem_regime) {
    const auto b = sparsity_budget(req.n, req.m, req.L, ensemble->mu_max, ensemble->kappa_max);
    Index k_omega = 0;
    Index k_max = 0;
    for (Index k : req.k_per_column) {
      k_omega += k;
      k_max = std::max(k_max, k);
    }
    if (req.k_T * req.L > req.n || req.k_T > b.k_T_max || k_omega > b.k_omega_max ||
        k_max > b.k_max_max) {
      throw ValidationError("make_instance: theorem-regime request exceeds the sparsity budget");
    }
  }
  auto gt = generate_truth(req.n, req.L, req.m, req.k_T, req.k_per_column, req.magnitude,
                           derive_seed(req.seed, {2}));
  if (req.corruption_scale != 1.0) gt.S *= req.corruption_scale;
  ProblemInstance inst;
  inst.M = measure(*ensemble, gt.Y, gt.S);
  inst.ensemble = std::move(ensemble);
  inst.Y_true = std::move(gt.Y);
  inst.S_true = std::move(gt.S);
  inst.supports = std::move(gt.supports);
  inst.lambda = req.lambda > 0.0 ? req.lambda : default_lambda(req.n);
  inst.mode = req.mode;
  inst.seed = req.seed;
  inst.magnitude = req.magnitude;
  return inst;
}

nlohmann::json instance_manifest(const ProblemInstance& inst) {
  return {
      {"seed", inst.seed},
      {"rng", kRngAlgorithm},
      {"mode", to_string(inst.mode)},
      {"lambda", inst.lambda},
      {"n", inst.ensemble->n},
      {"m", inst.ensemble->m},
      {"L", inst.ensemble->L()},
      {"magnitude", magnitude_json(inst.magnitude)},
      {"index_base", 0},
      {"row_support", inst.supports.row_support},
      {"column_support", inst.supports.column_support},
      {"omega_star", inst.supports.omega_star},
      {"k_T", inst.supports.k_T()},
      {"k_omega", inst.supports.k_omega()},
      {"k_max", inst.supports.k_max()},
  };
}

void save_bundle(const std::filesystem::path& dir, const ProblemInstance& inst) {
  save_ensemble(dir, *inst.ensemble);
  std::ofstream(dir / "manifest.json") << instance_manifest(inst).dump(2) << '\n';
  io::save_binary(dir / "Y_true.bin", inst.Y_true);
  io::save_binary(dir / "S_true.bin", inst.S_true);
  io::save_binary(dir / "M.bin", inst.M);
}

ProblemInstance load_bundle(const std::filesystem::path& dir) {
  std::ifstream is(dir / "manifest.json");
  if (!is) throw io::FormatError("missing " + (dir / "manifest.json").string());
  const auto man = nlohmann::json::parse(is);
  ProblemInstance inst;
  inst.ensemble = std::make_shared<const SensingEnsemble>(load_ensemble(dir));
  inst.Y_true = io::load_binary(dir / "Y_true.bin");
  inst.S_true = io::load_binary(dir / "S_true.bin");
  inst.M = io::load_binary(dir / "M.bin");
  inst.supports = SupportPattern::build(
      inst.ensemble->n, inst.ensemble->m, man.at("row_support").get<IndexSet>(),
      man.at("column_support").get<std::vector<IndexSet>>());
  inst.lambda = man.at("lambda").get<double>();
  inst.mode = man.at("mode").get<std::string>() == "theorem_regime" ? InstanceMode::theorem_regime
                                                                    : InstanceMode::free;
  inst.seed = man.at("seed").get<std::uint64_t>();
  inst.magnitude = magnitude_from_json(man.at("magnitude"));
  inst.validate();
  return inst;
}

}  // namespace rgl
