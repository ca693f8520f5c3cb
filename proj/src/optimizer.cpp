// SPDX-License-Identifier: Apache-2.0
#include "dnnpart/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "dnnpart/error.hpp"
#include "dnnpart/parallel.hpp"
#include "optimizer_detail.hpp"

namespace dnnpart {

ObjectiveVector objective_vector(const EvaluationRecord& rec, std::span<const Metric> objectives) {
  ObjectiveVector v;
  v.reserve(objectives.size());
  for (Metric m : objectives) v.push_back(is_benefit(m) ? -rec.metric(m) : rec.metric(m));
  return v;
}

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  bool strictly = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    strictly = strictly || a[i] < b[i];
  }
  return strictly;
}

std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const ObjectiveVector> points) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> dominated_by_me(n);
  std::vector<std::size_t> dominator_count(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dominates(points[i], points[j])) {
        dominated_by_me[i].push_back(j);
        ++dominator_count[j];
      } else if (dominates(points[j], points[i])) {
        dominated_by_me[j].push_back(i);
        ++dominator_count[i];
      }
    }
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < n; ++i)
    if (dominator_count[i] == 0) current.push_back(i);
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t i : current)
      for (std::size_t j : dominated_by_me[i])
        if (--dominator_count[j] == 0) next.push_back(j);
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const EvaluationRecord> records,
                                                         std::span<const Metric> objectives) {
  std::vector<ObjectiveVector> points;
  points.reserve(records.size());
  for (const auto& r : records) points.push_back(objective_vector(r, objectives));
  return non_dominated_sort(points);
}

std::vector<double> crowding_distance(std::span<const ObjectiveVector> front) {
  const std::size_t n = front.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> distance(n, 0.0);
  if (n == 0) return distance;
  const std::size_t dims = front.front().size();
  std::vector<std::size_t> idx(n);
  for (std::size_t m = 0; m < dims; ++m) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return front[a][m] < front[b][m]; });
    distance[idx.front()] = inf;
    distance[idx.back()] = inf;
    const double span = front[idx.back()][m] - front[idx.front()][m];
    if (!(span > 0.0) || !std::isfinite(span)) continue;
    for (std::size_t k = 1; k + 1 < n; ++k)
      distance[idx[k]] += (front[idx[k + 1]][m] - front[idx[k - 1]][m]) / span;
  }
  return distance;
}

GaParams GaParams::defaults(std::size_t layer_count, std::size_t platform_count) {
  GaParams p;
  std::size_t pop = 2 * ((layer_count + 4) / 5);
  pop += pop % 2;
  p.population = std::max<std::size_t>(20, pop);
  p.generations = std::max<std::size_t>(25, layer_count);
  p.crossover_rate = 0.9;
  p.mutation_rate =
      platform_count > 1 ? std::max(0.1, 1.0 / static_cast<double>(platform_count - 1)) : 1.0;
  return p;
}

void GaParams::validate() const {
  if (population < 2 || population % 2 != 0)
    throw Error("population must be an even number >= 2 (got " + std::to_string(population) + ")");
  if (generations < 1) throw Error("generations must be >= 1");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0))
    throw Error("crossover_rate must lie in [0, 1]");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0))
    throw Error("mutation_rate must lie in [0, 1]");
  if (objectives.empty()) throw Error("at least one objective is required");
  for (std::size_t i = 0; i < objectives.size(); ++i)
    for (std::size_t j = i + 1; j < objectives.size(); ++j)
      if (objectives[i] == objectives[j])
        throw Error("objective " + std::string(metric_name(objectives[i])) + " listed twice");
}

std::uint64_t scheme_count(std::size_t layer_count, std::size_t platform_count) {
  if (platform_count <= 1) return 1;
  // C(L + K, K) with K = N - 1, built incrementally; every partial product is
  // itself a binomial coefficient, so the reduced division below is exact.
  const std::uint64_t k = platform_count - 1;
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t g = std::gcd(result, i);
    const std::uint64_t factor = (layer_count + i) / (i / g);
    if (__builtin_mul_overflow(result / g, factor, &result))
      return std::numeric_limits<std::uint64_t>::max();
  }
  return result;
}

namespace detail {

Exploration summarize(std::vector<EvaluationRecord> evaluated, std::span<const Metric> objectives) {
  Exploration out;
  out.evaluations = evaluated.size();
  std::vector<std::size_t> feasible;
  std::vector<ObjectiveVector> points;
  for (std::size_t i = 0; i < evaluated.size(); ++i)
    if (evaluated[i].feasible) {
      feasible.push_back(i);
      points.push_back(objective_vector(evaluated[i], objectives));
    }
  out.dominated.assign(evaluated.size(), true);
  for (std::size_t a = 0; a < feasible.size(); ++a) {
    bool beaten = false;
    for (std::size_t b = 0; b < feasible.size() && !beaten; ++b)
      beaten = dominates(points[b], points[a]);
    if (!beaten) out.dominated[feasible[a]] = false;
  }
  for (std::size_t i = 0; i < evaluated.size(); ++i)
    if (!out.dominated[i]) out.front.members.push_back(evaluated[i]);

  if (out.front.members.empty()) {
    std::map<std::string, std::size_t> binding;
    for (const auto& r : evaluated)
      for (const auto& v : r.violated) ++binding[v];
    std::string msg = "no feasible scheme among " + std::to_string(evaluated.size()) +
                      " evaluated; binding constraints:";
    for (const auto& [name, count] : binding)
      msg += " " + name + " (" + std::to_string(count) + "/" + std::to_string(evaluated.size()) +
             ")";
    out.diagnostics.push_back(std::move(msg));
  }
  out.evaluated = std::move(evaluated);
  return out;
}

std::vector<EvaluationRecord> evaluate_batch(const SystemSpec& sys,
                                             std::span<const PartitionScheme> schemes,
                                             std::size_t threads) {
  std::vector<EvaluationRecord> out(schemes.size());
  parallel_for(schemes.size(), threads,
               [&](std::size_t i) { out[i] = evaluate_scheme(schemes[i], sys); });
  return out;
}

}  // namespace detail

Exploration exhaustive_pareto(const SystemSpec& sys, std::span<const Metric> objectives,
                              std::size_t threads) {
  const std::size_t L = sys.layer_count();
  const std::size_t K = sys.platform_count() - 1;
  const std::uint64_t total = scheme_count(L, sys.platform_count());
  if (total > kExhaustiveLimit)
    throw Error("scheme space too large for exhaustive search (" + std::to_string(total) +
                " > " + std::to_string(kExhaustiveLimit) + ")");

  std::vector<PartitionScheme> schemes;
  schemes.reserve(total);
  PartitionScheme s{std::vector<std::size_t>(K, 0)};
  for (;;) {
    schemes.push_back(s);
    // Next monotone vector in lexicographic order.
    std::size_t k = K;
    while (k > 0 && s.cuts[k - 1] == L) --k;
    if (k == 0) break;
    const std::size_t v = s.cuts[k - 1] + 1;
    for (std::size_t j = k - 1; j < K; ++j) s.cuts[j] = v;
  }
  Exploration out = detail::summarize(detail::evaluate_batch(sys, schemes, threads), objectives);
  return out;
}

const EvaluationRecord& select_final(const ParetoFront& front, const ObjectiveWeights& weights) {
  if (front.members.empty()) throw Error("cannot select a scheme from an empty front");
  std::size_t best = 0;
  double best_cost = weighted_cost(front.members[0], weights);
  for (std::size_t i = 1; i < front.members.size(); ++i) {
    const EvaluationRecord& r = front.members[i];
    const double cost = weighted_cost(r, weights);
    const double tol = 1e-12 * std::max(std::abs(cost), std::abs(best_cost));
    const EvaluationRecord& b = front.members[best];
    bool better = cost < best_cost - tol;
    if (!better && std::abs(cost - best_cost) <= tol)
      better = std::tie(r.partition_count, r.scheme) < std::tie(b.partition_count, b.scheme);
    if (better) {
      best = i;
      best_cost = cost;
    }
  }
  return front.members[best];
}

}  // namespace dnnpart
