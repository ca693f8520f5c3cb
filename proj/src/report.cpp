// SPDX-License-Identifier: Apache-2.0
#include "dnnpart/report.hpp"

#include <charconv>
#include <cmath>

namespace dnnpart {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string evaluation_csv(std::span<const EvaluationRecord> records,
                           std::span<const PlatformModel> platforms) {
  std::string out = "cuts;latency_s;energy_j;throughput_fps;link_bits_total";
  for (const auto& label : platform_labels(platforms)) out += ";mem_" + label + "_bytes";
  out += ";top1;feasible;violated\n";
  for (const auto& r : records) {
    out += format_cuts(r.scheme);
    out += ';' + format_double(r.latency_s);
    out += ';' + format_double(r.energy_j);
    out += ';' + format_double(r.throughput_fps);
    out += ';' + std::to_string(r.link_bits_total);
    for (const auto& m : r.memory.platforms) out += ';' + std::to_string(m.bytes);
    out += ';' + format_double(r.top1);
    out += r.feasible ? ";1;" : ";0;";
    for (std::size_t i = 0; i < r.violated.size(); ++i) {
      if (i) out += ',';
      out += r.violated[i];
    }
    out += '\n';
  }
  return out;
}

std::string memory_profile_csv(const SystemSpec& sys) {
  const auto labels = platform_labels(sys.platforms);
  const PlatformModel& first = sys.platforms.front();
  const PlatformModel& last = sys.platforms.back();
  const std::size_t L = sys.layer_count();
  std::string out = "cut;layer;mem_" + labels.front() + "_bytes;mem_" + labels.back() + "_bytes\n";
  for (std::size_t cut = 0; cut <= L; ++cut) {
    out += std::to_string(cut) + ';';
    out += cut == 0 ? std::string(AccuracyModel::kNoLayerKey) : sys.graph.layer(sys.order[cut - 1]).id;
    out += ';' + std::to_string(segment_memory(sys.graph, sys.order, 0, cut, first.bits));
    out += ';' + std::to_string(segment_memory(sys.graph, sys.order, cut, L, last.bits));
    out += '\n';
  }
  return out;
}

nlohmann::json record_to_json(const EvaluationRecord& rec, const SystemSpec& sys) {
  using nlohmann::json;
  const auto labels = platform_labels(sys.platforms);
  json j = json::object();
  j["cuts"] = rec.scheme.cuts;
  j["partition_count"] = rec.partition_count;
  j["latency_s"] = rec.latency_s;
  j["energy_j"] = rec.energy_j;
  if (std::isinf(rec.throughput_fps))
    j["throughput_fps"] = "unbounded";
  else
    j["throughput_fps"] = rec.throughput_fps;
  j["link_bits_total"] = rec.link_bits_total;
  json stages = json::array();
  for (std::size_t k = 0; k < rec.stages.size(); ++k) {
    const auto& s = rec.stages[k];
    const std::size_t lo = rec.scheme.segment_begin(k);
    const std::size_t hi = rec.scheme.segment_end(k, sys.layer_count());
    json layers = json::array();
    for (std::size_t pos = lo; pos < hi; ++pos) layers.push_back(sys.graph.layer(sys.order[pos]).id);
    stages.push_back({{"platform", labels[k]},
                      {"layers", std::move(layers)},
                      {"latency_s", s.latency_s},
                      {"energy_j", s.energy_j},
                      {"mem_bytes", rec.memory.platforms[k].bytes},
                      {"mem_capacity_bytes", rec.memory.platforms[k].capacity_bytes}});
  }
  j["stages"] = std::move(stages);
  json links = json::array();
  for (std::size_t k = 0; k < rec.links.size(); ++k)
    links.push_back({{"link", sys.links[k].name},
                     {"bits", rec.links[k].bits},
                     {"latency_s", rec.links[k].latency_s},
                     {"energy_j", rec.links[k].energy_j}});
  j["links"] = std::move(links);
  j["top1"] = rec.top1;
  j["feasible"] = rec.feasible;
  j["violated"] = rec.violated;
  return j;
}

}  // namespace dnnpart
