// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <map>
#include <set>

#include "dnnpart/error.hpp"
#include "dnnpart/optimizer.hpp"
#include "dnnpart/rng.hpp"
#include "optimizer_detail.hpp"

namespace dnnpart {

namespace {

constexpr int kRemutateAttempts = 8;
constexpr int kImmigrantAttempts = 16;

using Cuts = std::vector<std::size_t>;

class Nsga2 {
 public:
  Nsga2(const SystemSpec& sys, const GaParams& params)
      : sys_(sys),
        params_(params),
        rng_(params.seed),
        layers_(sys.layer_count()),
        genes_(sys.platform_count() - 1) {}

  Exploration run() {
    if (genes_ == 0) {
      evaluate({PartitionScheme{}});
      return finish(0);
    }
    std::vector<PartitionScheme> batch;
    for (std::size_t i = 0; i < params_.population; ++i)
      batch.push_back(novel(PartitionScheme{random_cuts()}));
    population_ = evaluate(batch);

    for (std::size_t gen = 0; gen < params_.generations; ++gen) {
      rank(population_);
      std::vector<PartitionScheme> offspring;
      while (offspring.size() < params_.population) {
        Cuts a = records_[tournament()].scheme.cuts;
        Cuts b = records_[tournament()].scheme.cuts;
        if (genes_ >= 2 && rng_.chance(params_.crossover_rate)) {
          const std::size_t point = 1 + rng_.index(genes_ - 1);
          std::swap_ranges(a.begin() + static_cast<std::ptrdiff_t>(point), a.end(),
                           b.begin() + static_cast<std::ptrdiff_t>(point));
          std::sort(a.begin(), a.end());
          std::sort(b.begin(), b.end());
        }
        mutate(a);
        mutate(b);
        offspring.push_back(novel(PartitionScheme{std::move(a)}));
        if (offspring.size() < params_.population)
          offspring.push_back(novel(PartitionScheme{std::move(b)}));
      }
      std::vector<std::size_t> merged = population_;
      for (std::size_t i : evaluate(offspring)) merged.push_back(i);
      std::sort(merged.begin(), merged.end());
      merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
      population_ = survivors(merged);
    }
    return finish(params_.generations);
  }

 private:
  // Uniform over monotone vectors: choose genes_ distinct slots out of
  // layers_ + genes_ (selection sampling), then undo the stars-and-bars shift.
  Cuts random_cuts() {
    Cuts cuts;
    cuts.reserve(genes_);
    const std::size_t slots = layers_ + genes_;
    for (std::size_t t = 0; t < slots && cuts.size() < genes_; ++t)
      if (rng_.index(slots - t) < genes_ - cuts.size()) cuts.push_back(t - cuts.size());
    return cuts;
  }

  void reset_gene(Cuts& cuts, std::size_t i) {
    const std::size_t lo = i == 0 ? 0 : cuts[i - 1];
    const std::size_t hi = i + 1 < cuts.size() ? cuts[i + 1] : layers_;
    cuts[i] = rng_.between(lo, hi);
  }

  void mutate(Cuts& cuts) {
    for (std::size_t i = 0; i < cuts.size(); ++i)
      if (rng_.chance(params_.mutation_rate)) reset_gene(cuts, i);
  }

  bool seen(const PartitionScheme& s) const { return index_.contains(s) || pending_.contains(s); }

  // Duplicate elimination: a child already evaluated is perturbed, then
  // replaced by a random immigrant; it is kept as a duplicate only when both
  // fail (small, nearly exhausted spaces).
  PartitionScheme novel(PartitionScheme s) {
    for (int i = 0; i < kRemutateAttempts && seen(s); ++i) reset_gene(s.cuts, rng_.index(genes_));
    for (int i = 0; i < kImmigrantAttempts && seen(s); ++i) s.cuts = random_cuts();
    pending_.insert(s);
    return s;
  }

  // Evaluates the not-yet-known schemes of `batch`; returns record indices for
  // every entry of the batch.
  std::vector<std::size_t> evaluate(const std::vector<PartitionScheme>& batch) {
    std::vector<PartitionScheme> fresh;
    std::set<PartitionScheme> queued;
    for (const auto& s : batch)
      if (!index_.contains(s) && queued.insert(s).second) fresh.push_back(s);
    auto results = detail::evaluate_batch(sys_, fresh, params_.threads);
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      index_.emplace(fresh[i], records_.size());
      records_.push_back(std::move(results[i]));
    }
    pending_.clear();
    std::vector<std::size_t> out;
    out.reserve(batch.size());
    for (const auto& s : batch) out.push_back(index_.at(s));
    return out;
  }

  // Constraint-dominated fronts: feasible records by Pareto rank, then
  // infeasible records grouped by equal total violation, ascending.
  std::vector<std::vector<std::size_t>> fronts(const std::vector<std::size_t>& members) const {
    std::vector<std::size_t> feasible, infeasible;
    for (std::size_t i : members) (records_[i].feasible ? feasible : infeasible).push_back(i);
    std::vector<ObjectiveVector> points;
    for (std::size_t i : feasible) points.push_back(objective_vector(records_[i], params_.objectives));
    std::vector<std::vector<std::size_t>> out;
    for (const auto& f : non_dominated_sort(points)) {
      std::vector<std::size_t> front;
      for (std::size_t k : f) front.push_back(feasible[k]);
      out.push_back(std::move(front));
    }
    std::stable_sort(infeasible.begin(), infeasible.end(), [&](std::size_t a, std::size_t b) {
      return records_[a].violation < records_[b].violation;
    });
    for (std::size_t k = 0; k < infeasible.size(); ++k) {
      if (k == 0 || records_[infeasible[k]].violation != records_[infeasible[k - 1]].violation)
        out.emplace_back();
      out.back().push_back(infeasible[k]);
    }
    return out;
  }

  std::vector<double> crowding(const std::vector<std::size_t>& front) const {
    std::vector<ObjectiveVector> points;
    for (std::size_t i : front) points.push_back(objective_vector(records_[i], params_.objectives));
    return crowding_distance(points);
  }

  void rank(const std::vector<std::size_t>& members) {
    rank_.clear();
    crowd_.clear();
    const auto fs = fronts(members);
    for (std::size_t r = 0; r < fs.size(); ++r) {
      const auto d = crowding(fs[r]);
      for (std::size_t k = 0; k < fs[r].size(); ++k) {
        rank_[fs[r][k]] = r;
        crowd_[fs[r][k]] = d[k];
      }
    }
  }

  std::size_t tournament() {
    const std::size_t a = population_[rng_.index(population_.size())];
    const std::size_t b = population_[rng_.index(population_.size())];
    const EvaluationRecord& x = records_[a];
    const EvaluationRecord& y = records_[b];
    if (x.feasible != y.feasible) return x.feasible ? a : b;
    if (!x.feasible) return y.violation < x.violation ? b : a;
    if (rank_.at(a) != rank_.at(b)) return rank_.at(a) < rank_.at(b) ? a : b;
    return crowd_.at(b) > crowd_.at(a) ? b : a;
  }

  std::vector<std::size_t> survivors(const std::vector<std::size_t>& merged) const {
    std::vector<std::size_t> next;
    for (const auto& front : fronts(merged)) {
      if (next.size() + front.size() <= params_.population) {
        next.insert(next.end(), front.begin(), front.end());
        continue;
      }
      const auto d = crowding(front);
      std::vector<std::size_t> order(front.size());
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
      for (std::size_t k = 0; next.size() < params_.population; ++k) next.push_back(front[order[k]]);
      break;
    }
    return next;
  }

  Exploration finish(std::size_t generations_run) {
    std::vector<EvaluationRecord> evaluated;
    evaluated.reserve(records_.size());
    for (const auto& [scheme, i] : index_) evaluated.push_back(records_[i]);
    Exploration out = detail::summarize(std::move(evaluated), params_.objectives);
    out.generations_run = generations_run;
    return out;
  }

  const SystemSpec& sys_;
  const GaParams& params_;
  Rng rng_;
  std::size_t layers_;
  std::size_t genes_;
  std::vector<EvaluationRecord> records_;
  std::map<PartitionScheme, std::size_t> index_;
  std::set<PartitionScheme> pending_;
  std::vector<std::size_t> population_;
  std::map<std::size_t, std::size_t> rank_;
  std::map<std::size_t, double> crowd_;
};

}  // namespace

Exploration nsga2(const SystemSpec& sys, const GaParams& params) {
  params.validate();
  return Nsga2(sys, params).run();
}

}  // namespace dnnpart
