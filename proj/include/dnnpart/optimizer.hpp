// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dnnpart/evaluator.hpp"

namespace dnnpart {

/// Objective values oriented so that smaller is better on every axis.
using ObjectiveVector = std::vector<double>;

ObjectiveVector objective_vector(const EvaluationRecord& rec, std::span<const Metric> objectives);

/// a <= b everywhere and a < b somewhere.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

/// Fronts F1, F2, ... as indices into `points`, each ascending.
std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const ObjectiveVector> points);
std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const EvaluationRecord> records,
                                                         std::span<const Metric> objectives);

/// Crowding distance of each member of one front. Boundary points of every
/// objective get +infinity; objectives with a zero or non-finite span add 0.
std::vector<double> crowding_distance(std::span<const ObjectiveVector> front);

struct GaParams {
  std::size_t population = 20;
  std::size_t generations = 25;
  double crossover_rate = 0.9;
  double mutation_rate = 0.1;
  std::uint64_t seed = 0;
  std::vector<Metric> objectives{Metric::latency, Metric::energy};
  /// Worker threads for evaluating a generation; results do not depend on it.
  std::size_t threads = 1;

  /// population = max(20, 2 * ceil(L / 5)) rounded up to even,
  /// generations = max(25, L), mutation = max(0.1, 1 / (N - 1)) per gene.
  static GaParams defaults(std::size_t layer_count, std::size_t platform_count);
  void validate() const;
};

struct ParetoFront {
  /// Feasible, mutually non-dominated records, ordered by cut vector.
  std::vector<EvaluationRecord> members;
};

struct Exploration {
  /// Every distinct scheme evaluated, ordered by cut vector.
  std::vector<EvaluationRecord> evaluated;
  /// dominated[i]: evaluated[i] is infeasible or dominated by a feasible record.
  std::vector<bool> dominated;
  ParetoFront front;
  std::size_t evaluations = 0;
  std::size_t generations_run = 0;
  std::vector<std::string> diagnostics;
};

/// C(L + N - 1, N - 1), saturating at UINT64_MAX.
std::uint64_t scheme_count(std::size_t layer_count, std::size_t platform_count);

inline constexpr std::uint64_t kExhaustiveLimit = 1'000'000;

/// Evaluates every monotone cut vector. Throws Error when the space exceeds
/// kExhaustiveLimit schemes.
Exploration exhaustive_pareto(const SystemSpec& sys, std::span<const Metric> objectives,
                              std::size_t threads = 1);

/// NSGA-II over cut vectors with feasibility-first tournaments, single-point
/// crossover plus sort repair, bounded reset mutation, elitist (mu + lambda)
/// survival and an archive of every evaluated scheme. The returned front is
/// the non-dominated feasible subset of that archive.
Exploration nsga2(const SystemSpec& sys, const GaParams& params);

/// Lowest weighted cost; ties go to fewer partitions, then smaller cuts.
/// `weights` must already carry references (see resolve_references).
const EvaluationRecord& select_final(const ParetoFront& front, const ObjectiveWeights& weights);

}  // namespace dnnpart
