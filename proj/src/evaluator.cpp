// SPDX-License-Identifier: Apache-2.0
#include "dnnpart/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dnnpart/error.hpp"

namespace dnnpart {

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::latency: return "latency";
    case Metric::energy: return "energy";
    case Metric::throughput: return "throughput";
    case Metric::bandwidth: return "bandwidth";
    case Metric::accuracy: return "accuracy";
    case Metric::memory: return "memory";
  }
  return "?";
}

Metric parse_metric(std::string_view name) {
  for (Metric m : kAllMetrics)
    if (metric_name(m) == name) return m;
  throw Error("unknown metric \"" + std::string(name) +
              "\" (expected latency, energy, throughput, bandwidth, accuracy or memory)");
}

std::vector<Metric> parse_metric_list(std::string_view text) {
  std::vector<Metric> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    const Metric m = parse_metric(text.substr(start, comma - start));
    if (std::find(out.begin(), out.end(), m) != out.end())
      throw Error("metric " + std::string(metric_name(m)) + " listed twice");
    out.push_back(m);
    start = comma + 1;
  }
  return out;
}

bool is_benefit(Metric m) { return m == Metric::throughput || m == Metric::accuracy; }

void Constraints::validate() const {
  auto check = [](const std::optional<double>& v, std::string_view name) {
    if (v && (!std::isfinite(*v) || *v <= 0))
      throw Error("constraint " + std::string(name) + " must be finite and positive");
  };
  check(max_latency_s, "max_latency_s");
  check(max_energy_j, "max_energy_j");
  check(min_throughput_fps, "min_throughput_fps");
  check(max_link_bits, "max_link_bits");
  check(min_top1, "min_top1");
}

void ObjectiveWeights::validate() const {
  bool any = false;
  for (const auto& [m, c] : entries) {
    if (!std::isfinite(c) || c < 0)
      throw Error("weight for " + std::string(metric_name(m)) + " must be finite and >= 0");
    any = any || c > 0;
  }
  if (!any) throw Error("at least one objective weight must be nonzero");
  for (const auto& [m, r] : references)
    if (!std::isfinite(r) || r < 0)
      throw Error("reference for " + std::string(metric_name(m)) + " must be finite and >= 0");
}

void SystemSpec::validate() const {
  if (platforms.empty()) throw Error("at least one platform is required");
  if (links.size() + 1 != platforms.size())
    throw Error("a chain of " + std::to_string(platforms.size()) + " platforms needs " +
                std::to_string(platforms.size() - 1) + " links, got " +
                std::to_string(links.size()));
  if (!is_topological(graph, order.order))
    throw Error("layer order is not a topological order of graph " + graph.name());
  for (const auto& p : platforms) p.validate();
  for (const auto& l : links) l.validate();
  accuracy.validate();
  constraints.validate();
  weights.validate();
}

double EvaluationRecord::metric(Metric m) const {
  switch (m) {
    case Metric::latency: return latency_s;
    case Metric::energy: return energy_j;
    case Metric::throughput: return throughput_fps;
    case Metric::bandwidth: return static_cast<double>(link_bits_total);
    case Metric::accuracy: return top1;
    case Metric::memory: return static_cast<double>(memory.max_bytes());
  }
  return 0.0;
}

std::uint64_t EvaluationRecord::max_link_bits() const {
  std::uint64_t m = 0;
  for (const auto& l : links) m = std::max(m, l.bits);
  return m;
}

double throughput(std::span<const double> stage_latencies, std::span<const double> link_latencies) {
  double slowest = 0.0;
  for (double d : stage_latencies) slowest = std::max(slowest, d);
  for (double d : link_latencies) slowest = std::max(slowest, d);
  if (slowest <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / slowest;
}

ConstraintCheck check_constraints(const EvaluationRecord& rec, const Constraints& c) {
  ConstraintCheck out;
  auto upper = [&](const std::optional<double>& bound, double value, const char* name) {
    if (bound && value > *bound) {
      out.violated.emplace_back(name);
      out.violation += (value - *bound) / *bound;
    }
  };
  auto lower = [&](const std::optional<double>& bound, double value, const char* name) {
    if (bound && value < *bound) {
      out.violated.emplace_back(name);
      out.violation += (*bound - value) / *bound;
    }
  };
  upper(c.max_latency_s, rec.latency_s, "max_latency_s");
  upper(c.max_energy_j, rec.energy_j, "max_energy_j");
  lower(c.min_throughput_fps, rec.throughput_fps, "min_throughput_fps");
  upper(c.max_link_bits, static_cast<double>(rec.max_link_bits()), "max_link_bits");
  lower(c.min_top1, rec.top1, "min_top1");
  out.feasible = out.violated.empty();
  return out;
}

EvaluationRecord evaluate_scheme(const PartitionScheme& scheme, const SystemSpec& sys) {
  const std::size_t L = sys.layer_count();
  const std::size_t N = sys.platform_count();
  validate_scheme(scheme, N, L);

  EvaluationRecord rec;
  rec.scheme = scheme;
  rec.partition_count = scheme.partition_count(L);

  std::vector<double> stage_latency(N, 0.0), link_latency(N - 1, 0.0);
  rec.stages.resize(N);
  for (std::size_t k = 0; k < N; ++k) {
    StageUsage& stage = rec.stages[k];
    const std::size_t lo = scheme.segment_begin(k);
    const std::size_t hi = scheme.segment_end(k, L);
    stage.layers = hi - lo;
    for (std::size_t pos = lo; pos < hi; ++pos) {
      const CostEntry c = layer_cost(sys.platforms[k], sys.graph.layer(sys.order[pos]).id);
      stage.latency_s += c.latency_s;
      stage.energy_j += c.energy_j;
    }
    stage_latency[k] = stage.latency_s;
  }

  rec.links.resize(N - 1);
  for (std::size_t k = 0; k + 1 < N; ++k) {
    const std::size_t cut = scheme.cuts[k];
    if (k > 0 && cut == scheme.cuts[k - 1]) continue;
    std::uint64_t elems = 0;
    for (LayerIndex producer : cut_tensors(sys.graph, sys.order, cut))
      elems += sys.graph.layer(producer).out_elems;
    LinkUsage& link = rec.links[k];
    link.bits = elems * static_cast<std::uint64_t>(sys.platforms[k].bits);
    if (link.bits > 0) {
      const CostEntry c = link_transfer(sys.links[k], link.bits);
      link.latency_s = c.latency_s;
      link.energy_j = c.energy_j;
    }
    link_latency[k] = link.latency_s;
    rec.link_bits_total += link.bits;
  }

  for (const auto& s : rec.stages) {
    rec.latency_s += s.latency_s;
    rec.energy_j += s.energy_j;
  }
  for (const auto& l : rec.links) {
    rec.latency_s += l.latency_s;
    rec.energy_j += l.energy_j;
  }
  rec.throughput_fps = throughput(stage_latency, link_latency);

  rec.memory = memory_feasible(sys.graph, sys.order, scheme, sys.platforms);
  for (const auto& region : sys.region_schedules)
    rec.memory.schedule_used.push_back(layer_ids(sys.graph, region.order));
  rec.top1 = accuracy_eval(sys.accuracy, scheme, sys.order, sys.graph, sys.platforms);

  ConstraintCheck check = check_constraints(rec, sys.constraints);
  for (const auto& m : rec.memory.platforms) {
    if (m.fits()) continue;
    check.violated.push_back("mem_" + m.platform);
    check.violation += static_cast<double>(m.bytes - m.capacity_bytes) /
                       static_cast<double>(std::max<std::uint64_t>(m.capacity_bytes, 1));
  }
  rec.feasible = check.violated.empty();
  rec.violated = std::move(check.violated);
  rec.violation = check.violation;
  return rec;
}

PartitionScheme last_platform_scheme(std::size_t platform_count) {
  return PartitionScheme{std::vector<std::size_t>(platform_count - 1, 0)};
}

ObjectiveWeights resolve_references(ObjectiveWeights weights, const SystemSpec& sys) {
  std::optional<EvaluationRecord> base;
  for (Metric m : kAllMetrics) {
    auto it = weights.references.find(m);
    double value = 0.0;
    if (it != weights.references.end()) {
      value = it->second;
    } else {
      if (!base) base = evaluate_scheme(last_platform_scheme(sys.platform_count()), sys);
      value = base->metric(m);
    }
    weights.references[m] = (std::isfinite(value) && value > 0.0) ? value : 1.0;
  }
  return weights;
}

double weighted_cost(const EvaluationRecord& rec, const ObjectiveWeights& weights) {
  double total = 0.0;
  for (const auto& [m, c] : weights.entries) {
    if (c == 0.0) continue;
    auto it = weights.references.find(m);
    const double ref = it == weights.references.end() ? 1.0 : it->second;
    const double value = rec.metric(m);
    if (is_benefit(m)) {
      if (value == 0.0)
        throw Error("degenerate benefit metric " + std::string(metric_name(m)) + " for scheme [" +
                    format_cuts(rec.scheme) + "]");
      total += c * (ref / value);
    } else {
      total += c * (value / ref);
    }
  }
  return total;
}

}  // namespace dnnpart
