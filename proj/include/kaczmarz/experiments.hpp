#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kaczmarz/clustering.hpp"
#include "kaczmarz/config.hpp"
#include "kaczmarz/feasibility.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/matgen.hpp"
#include "kaczmarz/metrics.hpp"
#include "kaczmarz/report.hpp"
#include "kaczmarz/solvers.hpp"

namespace kaczmarz {

namespace detail {

// Streams split off each trial's generator.
enum Stream : std::uint64_t { kMatrix = 1, kSolution = 2, kStart = 3, kSolver = 4, kNoise = 5 };

/// The full square U is only kept for small systems; no metric reads it.
inline UFactor u_factor_for(std::size_t m) { return m > 500 ? UFactor::Thin : UFactor::Full; }

inline Vector draw_solution(const ExperimentConfig& c, Rng& rng) {
  if (c.x_star == "last-basis") return last_basis_vector(c.n);
  if (c.x_star == "gaussian") return gaussian_vector(c.n, rng);
  return random_unit_vector(c.n, rng);
}

inline Vector draw_start(const ExperimentConfig& c, Rng& rng) {
  return c.x0 == "sphere" ? random_unit_vector(c.n, rng) : Vector(c.n, 0.0);
}

inline SolverConfig solver_config(const ExperimentConfig& c, std::uint64_t seed, Vector x0) {
  SolverConfig s;
  s.beta = c.solver.beta;
  s.lambda = c.solver.lambda;
  s.max_iterations = c.solver.iterations;
  s.trace_stride = c.solver.stride;
  s.seed = seed;
  s.initial = std::move(x0);
  return s;
}

template <class Sampler>
Table traced_run(const std::string& name, const LinearSystem& system, const SolverConfig& solver, Sampler&& sampler,
                 TraceRecorder::Inputs inputs) {
  TraceRecorder recorder(std::move(inputs));
  const std::vector<Observer> observers{as_observer(recorder)};
  run_solver(system, solver, std::forward<Sampler>(sampler), observers);
  return trace_table(name, recorder.take());
}

inline void finish_traces(ExperimentReport& r, const std::vector<std::string>& variants,
                          std::vector<std::vector<Table>> per_trial, Aggregate mode) {
  r.trial_traces = std::move(per_trial);
  for (std::size_t v = 0; v < variants.size(); ++v) r.traces.push_back(aggregate_tables(r.trial_traces[v], mode));
}

inline std::string pct(double fraction) { return format_double(100.0 * fraction); }

inline std::string kappa_name(double kappa) {
  const double e = std::log10(kappa);
  if (e == std::round(e)) return "kappa_1e" + std::to_string(static_cast<int>(e));
  char buf[64];
  std::snprintf(buf, sizeof buf, "kappa_%g", kappa);
  return buf;
}

inline void require_experiment(const ExperimentConfig& c, std::string_view name) {
  if (c.experiment != name)
    throw Error(ErrorCode::Config, "config is for '" + c.experiment + "', expected '" + std::string(name) + "'");
}

inline ExperimentReport new_report(const ExperimentConfig& c) {
  ExperimentReport r;
  r.experiment = c.experiment;
  r.config = Json{{"config", c.echo}, {"provenance", provenance(c)}};
  return r;
}

}  // namespace detail

/// Classification feasibility with pairwise augmentation: SKM under the
/// three row-sampling schemes on A' and P, from a shared start per trial.
inline ExperimentReport run_pairwise(const ExperimentConfig& c) {
  detail::require_experiment(c, "pairwise");
  ExperimentReport r = detail::new_report(c);
  std::vector<std::vector<Table>> per_trial(c.schemes.size());

  for (std::size_t t = 0; t < c.trials; ++t) {
    const Rng trial(trial_seed(c.seed, t));
    Rng gen_rng = trial.split(detail::kMatrix), sol_rng = trial.split(detail::kSolution),
        start_rng = trial.split(detail::kStart);
    const auto gen = generate_ill_conditioned(c.m, c.n, c.spectrum.spec(), gen_rng, detail::u_factor_for(c.m));
    const Vector x_star = detail::draw_solution(c, sol_rng);
    const Vector labels = binarize_rhs(gen.matrix(), x_star);
    FeasibilitySystem fs = hadamard_transform(gen.matrix(), labels);
    attach_pairwise_differences(fs);
    LinearSystem combined = combined_system(fs);
    combined.ground_truth = x_star;
    const double box = c.box_bound ? *c.box_bound : 2.0 * max_abs(x_star);
    const ChebyshevResult center = chebyshev_center(fs.base.matrix, box);
    const Vector x0 = detail::draw_start(c, start_rng);
    const std::uint64_t solver_seed = trial.split(detail::kSolver).next_u64();

    for (std::size_t s = 0; s < c.schemes.size(); ++s) {
      const auto dist = build_distribution(SamplingStrategy::of(parse_strategy_kind(c.schemes[s])), fs);
      per_trial[s].push_back(detail::traced_run(c.schemes[s], combined, detail::solver_config(c, solver_seed, x0),
                                                DistributionSampler(dist, c.solver.beta),
                                                {x_star, center, &gen.matrix(), &labels, nullptr}));
    }
  }
  detail::finish_traces(r, c.schemes, std::move(per_trial), c.aggregate);

  r.summary.header = {"variant", "final_approx_error", "final_cheb_error", "final_accuracy_pct"};
  for (const Table& t : r.traces)
    r.summary.rows.push_back({t.name, format_double(t.column("approx_error").back()),
                              format_double(t.column("cheb_error").back()), detail::pct(t.column("accuracy").back())});
  for (auto [metric, label, log] : {std::tuple{"approx_error", "approximation error", true},
                                    std::tuple{"cheb_error", "Chebyshev error", true},
                                    std::tuple{"accuracy", "accuracy", false}}) {
    Plot p{metric, std::string("Pairwise schemes: ") + label, label, log, {}};
    for (const auto& s : c.schemes) p.series.push_back({s, metric, s});
    r.plots.push_back(std::move(p));
  }
  return r;
}

/// Least-squares coresets: relative error of the coreset solution against
/// the full solution over a sweep of condition numbers and size factors.
inline ExperimentReport run_coreset(const ExperimentConfig& c) {
  detail::require_experiment(c, "coreset");
  ExperimentReport r = detail::new_report(c);
  std::vector<std::string> names;
  for (double kappa : c.kappas) names.push_back(detail::kappa_name(kappa));
  std::vector<std::vector<Table>> per_trial(c.kappas.size());

  for (std::size_t t = 0; t < c.trials; ++t) {
    const Rng trial(trial_seed(c.seed, t));
    Rng sol_rng = trial.split(detail::kSolution);
    const Vector x_star = detail::draw_solution(c, sol_rng);
    for (std::size_t q = 0; q < c.kappas.size(); ++q) {
      // every condition number gets its own matrix and noise stream
      Rng gen_rng = trial.split(detail::kMatrix).split(q);
      Rng noise_rng = trial.split(detail::kNoise).split(q);
      const auto gen =
          generate_ill_conditioned(c.m, c.n, SpectrumSpec::explicit_ratio(c.kappas[q]), gen_rng, detail::u_factor_for(c.m));
      LinearSystem sys = make_system(gen, x_star);
      const double scale = c.noise * norm2(sys.rhs) / std::sqrt(static_cast<double>(c.m));
      for (double& b : sys.rhs) b += scale * noise_rng.normal();
      const Vector x_a = least_squares(sys.matrix, sys.rhs);
      const double full_residual = distance(multiply(sys.matrix, x_a), sys.rhs);

      Table tab;
      tab.name = names[q];
      tab.x_name = "c";
      tab.x = c.c_values;
      Vector rows, rel, res_full, res_core, res_ls;
      for (double cf : c.c_values) {
        const Coreset cs = extract_coreset(sys, cf, x_star);
        const Vector x_b = least_squares(cs.system.matrix, cs.system.rhs);
        rows.push_back(static_cast<double>(cs.kept.size()));
        rel.push_back(distance(x_b, x_a) / norm2(x_a));
        res_full.push_back(distance(multiply(sys.matrix, x_b), sys.rhs));
        res_core.push_back(distance(multiply(cs.system.matrix, x_b), cs.system.rhs));
        res_ls.push_back(full_residual);
      }
      tab.add_column("rows", std::move(rows));
      tab.add_column("rel_error", std::move(rel));
      tab.add_column("residual_full", std::move(res_full));
      tab.add_column("residual_coreset", std::move(res_core));
      tab.add_column("residual_lstsq", std::move(res_ls));
      per_trial[q].push_back(std::move(tab));
    }
  }
  detail::finish_traces(r, names, std::move(per_trial), c.aggregate);

  r.summary.header = {"kappa", "c", "rows", "rel_error", "residual_full", "residual_coreset", "residual_lstsq"};
  for (std::size_t q = 0; q < c.kappas.size(); ++q) {
    const Table& tab = r.traces[q];
    for (std::size_t i = 0; i < tab.rows(); ++i)
      r.summary.rows.push_back({format_double(c.kappas[q]), format_double(tab.x[i]),
                                format_double(tab.column("rows")[i]), format_double(tab.column("rel_error")[i]),
                                format_double(tab.column("residual_full")[i]),
                                format_double(tab.column("residual_coreset")[i]),
                                format_double(tab.column("residual_lstsq")[i])});
  }
  Plot rel{"rel_error", "Coreset relative error ||x_B - x_A|| / ||x_A||", "relative error", true, {}};
  Plot res{"residuals", "Residual norms of the coreset solution", "residual", true, {}};
  for (const auto& name : names) {
    rel.series.push_back({name, "rel_error", name});
    res.series.push_back({name, "residual_full", name + " ||A x_B - b||"});
    res.series.push_back({name, "residual_coreset", name + " ||B x_B - b_B||"});
  }
  r.plots = {std::move(rel), std::move(res)};
  return r;
}

/// Four SKM variants on one binary-classification feasibility system per
/// trial: full Hadamard SKM, coreset-reduced SKM, epsilon-cover guided SKM
/// and online active-set reduction.
inline ExperimentReport run_cluster_variants(const ExperimentConfig& c) {
  detail::require_experiment(c, "cluster-variants");
  ExperimentReport r = detail::new_report(c);
  const std::vector<std::string> names{"hadamard-skm", "reduced-matrix", "epsilon-cover", "online-reduction"};
  std::vector<std::vector<Table>> per_trial(names.size());
  Vector epsilons, cluster_counts, coreset_rows;

  for (std::size_t t = 0; t < c.trials; ++t) {
    const Rng trial(trial_seed(c.seed, t));
    Rng gen_rng = trial.split(detail::kMatrix), sol_rng = trial.split(detail::kSolution),
        start_rng = trial.split(detail::kStart);
    const auto gen = generate_ill_conditioned(c.m, c.n, c.spectrum.spec(), gen_rng, detail::u_factor_for(c.m));
    const Vector x_star = detail::draw_solution(c, sol_rng);
    const Vector labels = binarize_rhs(gen.matrix(), x_star);
    const FeasibilitySystem fs = hadamard_transform(gen.matrix(), labels);
    LinearSystem sys = fs.base;
    sys.ground_truth = x_star;
    const Vector x0 = detail::draw_start(c, start_rng);
    const SolverConfig solver = detail::solver_config(c, trial.split(detail::kSolver).next_u64(), x0);
    const TraceRecorder::Inputs inputs{x_star, std::nullopt, &gen.matrix(), &labels, nullptr};
    const auto uniform = SamplingStrategy::of(StrategyKind::Uniform);

    per_trial[0].push_back(detail::traced_run(names[0], sys, solver,
                                              DistributionSampler(build_distribution(uniform, sys), c.solver.beta),
                                              inputs));

    const Coreset cs = extract_coreset(sys, c.coreset_c, x_star);
    coreset_rows.push_back(static_cast<double>(cs.kept.size()));
    per_trial[1].push_back(detail::traced_run(
        names[1], cs.system, solver, DistributionSampler(build_distribution(uniform, cs.system), c.solver.beta), inputs));

    const double eps = c.cluster.epsilon ? *c.cluster.epsilon
                                         : choose_epsilon(sys.matrix, c.n, 4 * c.n, c.cluster.criterion);
    ClusterPartition partition = epsilon_cover(sys.matrix, eps, c.cluster.criterion);
    epsilons.push_back(eps);
    cluster_counts.push_back(static_cast<double>(partition.size()));
    ClusterGuidedSampler guided(sys.matrix, std::move(partition), c.cluster.mode, c.solver.beta,
                                c.cluster.reassign_every);
    per_trial[2].push_back(detail::traced_run(names[2], sys, solver, guided, inputs));

    OnlineReductionSampler online(sys, build_schedule(c.m, c.n), c.solver.beta, c.cluster.signed_residual);
    per_trial[3].push_back(detail::traced_run(names[3], sys, solver, online, inputs));
  }
  detail::finish_traces(r, names, std::move(per_trial), c.aggregate);
  r.scalars["epsilon"] = epsilons;
  r.scalars["clusters"] = cluster_counts;
  r.scalars["coreset_rows"] = coreset_rows;

  r.summary.header = {"variant", "accuracy_pct", "approx_error"};
  for (const Table& t : r.traces)
    r.summary.rows.push_back({t.name, detail::pct(t.column("accuracy").back()),
                              format_double(t.column("approx_error").back())});
  for (auto [metric, label, log] :
       {std::tuple{"approx_error", "approximation error", true}, std::tuple{"accuracy", "accuracy", false}}) {
    Plot p{metric, std::string("SKM variants: ") + label, label, log, {}};
    for (const auto& n : names) p.series.push_back({n, metric, n});
    r.plots.push_back(std::move(p));
  }
  return r;
}

/// Per-direction error |<x_k - x*, v_j>| under RK on the exponential-spectrum
/// system with x* = e_n.
inline ExperimentReport run_spectral_convergence(const ExperimentConfig& c) {
  detail::require_experiment(c, "spectral-convergence");
  ExperimentReport r = detail::new_report(c);
  std::vector<std::vector<Table>> per_trial(c.strategies.size());

  for (std::size_t t = 0; t < c.trials; ++t) {
    const Rng trial(trial_seed(c.seed, t));
    Rng gen_rng = trial.split(detail::kMatrix), sol_rng = trial.split(detail::kSolution),
        start_rng = trial.split(detail::kStart);
    const auto gen = generate_ill_conditioned(c.m, c.n, c.spectrum.spec(), gen_rng, detail::u_factor_for(c.m));
    const Vector x_star = detail::draw_solution(c, sol_rng);
    const LinearSystem sys = make_system(gen, x_star);
    const SolverConfig solver =
        detail::solver_config(c, trial.split(detail::kSolver).next_u64(), detail::draw_start(c, start_rng));
    for (std::size_t s = 0; s < c.strategies.size(); ++s) {
      const auto kind = parse_strategy_kind(c.strategies[s]);
      const auto strategy = kind == StrategyKind::Spectral ? SamplingStrategy::spectral(gen.v_factor().column(c.n - 1))
                                                           : SamplingStrategy::of(kind);
      per_trial[s].push_back(detail::traced_run(c.strategies[s], sys, solver,
                                                DistributionSampler(build_distribution(strategy, sys), c.solver.beta),
                                                {x_star, std::nullopt, nullptr, nullptr, &gen.v_factor()}));
    }
  }
  detail::finish_traces(r, c.strategies, std::move(per_trial), c.aggregate);

  r.summary.header = {"variant", "final_approx_error"};
  for (std::size_t j = 1; j <= c.n; ++j) r.summary.header.push_back("final_sing_err_" + std::to_string(j));
  for (const Table& t : r.traces) {
    std::vector<std::string> row{t.name, format_double(t.column("approx_error").back())};
    for (std::size_t j = 1; j <= c.n; ++j) row.push_back(format_double(t.column("sing_err_" + std::to_string(j)).back()));
    r.summary.rows.push_back(std::move(row));
  }
  for (const auto& s : c.strategies) {
    Plot p{"singular_errors_" + s, "Singular errors |<x_k - x*, v_j>| (" + s + ")", "singular error", true, {}};
    for (std::size_t j = 1; j <= c.n; ++j)
      p.series.push_back({s, "sing_err_" + std::to_string(j), "j = " + std::to_string(j)});
    r.plots.push_back(std::move(p));
  }
  return r;
}

namespace detail {

/// Wraps a sampler and notes the first k with ||x_k - x*|| <= tol; the
/// sampler for step k sees x_{k-1}, so every iterate passes through here.
template <class Inner>
class CrossingWatch {
 public:
  CrossingWatch(Inner inner, const Vector& x_star, double tol, std::optional<std::size_t>& crossed)
      : inner_(std::move(inner)), x_star_(&x_star), tol_(tol), crossed_(&crossed) {}

  void operator()(std::size_t k, std::span<const double> x, Rng& rng, std::vector<std::size_t>& tau) {
    if (!*crossed_ && distance(x, *x_star_) <= tol_) *crossed_ = k - 1;
    inner_(k, x, rng, tau);
  }

 private:
  Inner inner_;
  const Vector* x_star_;
  double tol_;
  std::optional<std::size_t>* crossed_;
};

}  // namespace detail

/// Uniform against spectral row weights on the same systems and starts;
/// records iterations until ||x - x*|| <= threshold (K and flagged when the
/// threshold is never reached).
inline ExperimentReport run_weighted_vs_uniform(const ExperimentConfig& c) {
  detail::require_experiment(c, "weighted-vs-uniform");
  ExperimentReport r = detail::new_report(c);
  const std::size_t count = c.strategies.size();
  std::vector<std::vector<Table>> per_trial(count);
  std::vector<Vector> iterations(count), flagged(count);
  Vector ratio;

  for (std::size_t t = 0; t < c.trials; ++t) {
    const Rng trial(trial_seed(c.seed, t));
    Rng gen_rng = trial.split(detail::kMatrix), sol_rng = trial.split(detail::kSolution),
        start_rng = trial.split(detail::kStart);
    const auto gen = generate_ill_conditioned(c.m, c.n, c.spectrum.spec(), gen_rng, detail::u_factor_for(c.m));
    const Vector x_star = detail::draw_solution(c, sol_rng);
    const LinearSystem sys = make_system(gen, x_star);
    const SolverConfig solver =
        detail::solver_config(c, trial.split(detail::kSolver).next_u64(), detail::draw_start(c, start_rng));
    for (std::size_t s = 0; s < count; ++s) {
      const auto kind = parse_strategy_kind(c.strategies[s]);
      const auto strategy = kind == StrategyKind::Spectral ? SamplingStrategy::spectral(gen.v_factor().column(c.n - 1))
                                                           : SamplingStrategy::of(kind);
      std::optional<std::size_t> crossed;
      TraceRecorder recorder({x_star, std::nullopt, nullptr, nullptr, &gen.v_factor()});
      const std::vector<Observer> observers{as_observer(recorder)};
      const SolveResult res = run_solver(
          sys, solver,
          detail::CrossingWatch(DistributionSampler(build_distribution(strategy, sys), c.solver.beta), x_star,
                                c.threshold, crossed),
          observers);
      if (!crossed && distance(res.x, x_star) <= c.threshold) crossed = res.iterations;
      iterations[s].push_back(static_cast<double>(crossed ? *crossed : c.solver.iterations));
      flagged[s].push_back(crossed ? 0.0 : 1.0);
      per_trial[s].push_back(trace_table(c.strategies[s], recorder.take()));
    }
    if (count >= 2) ratio.push_back(iterations[1].back() / std::max(1.0, iterations[0].back()));
  }
  detail::finish_traces(r, c.strategies, std::move(per_trial), c.aggregate);
  for (std::size_t s = 0; s < count; ++s) {
    r.scalars["iterations:" + c.strategies[s]] = iterations[s];
    r.scalars["flagged:" + c.strategies[s]] = flagged[s];
  }
  if (count >= 2) r.scalars["ratio"] = ratio;

  r.summary.header = {"trial"};
  for (const auto& s : c.strategies) {
    r.summary.header.push_back(s + "_iterations");
    r.summary.header.push_back(s + "_flagged");
  }
  if (count >= 2) r.summary.header.push_back("ratio");
  auto add_row = [&](std::string label, auto value_of) {
    std::vector<std::string> row{std::move(label)};
    for (std::size_t s = 0; s < count; ++s) {
      row.push_back(format_double(value_of(iterations[s])));
      row.push_back(format_double(value_of(flagged[s])));
    }
    if (count >= 2) row.push_back(format_double(value_of(ratio)));
    r.summary.rows.push_back(std::move(row));
  };
  for (std::size_t t = 0; t < c.trials; ++t) add_row(std::to_string(t), [t](const Vector& v) { return v[t]; });
  add_row("mean", [](const Vector& v) { return mean_of(v); });

  const std::string last = "sing_err_" + std::to_string(c.n);
  Plot err{"approx_error", "Approximation error: weighted vs uniform", "approximation error", true, {}};
  Plot dir{last, "Error along the least singular direction", "singular error", true, {}};
  for (const auto& s : c.strategies) {
    err.series.push_back({s, "approx_error", s});
    dir.series.push_back({s, last, s});
  }
  r.plots = {std::move(err), std::move(dir)};
  return r;
}

inline ExperimentReport run_experiment(const ExperimentConfig& c) {
  if (c.experiment == "pairwise") return run_pairwise(c);
  if (c.experiment == "coreset") return run_coreset(c);
  if (c.experiment == "cluster-variants") return run_cluster_variants(c);
  if (c.experiment == "spectral-convergence") return run_spectral_convergence(c);
  if (c.experiment == "weighted-vs-uniform") return run_weighted_vs_uniform(c);
  throw Error(ErrorCode::Config, "unknown experiment '" + c.experiment + "'");
}

}  // namespace kaczmarz
