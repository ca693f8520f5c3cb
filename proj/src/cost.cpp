// SPDX-License-Identifier: Apache-2.0
#include "dnnpart/cost.hpp"

#include <algorithm>
#include <cmath>

#include "dnnpart/error.hpp"
#include "json_util.hpp"

namespace dnnpart {

namespace {

using detail::Json;

void check_entry(const CostEntry& e, std::string_view what) {
  if (!std::isfinite(e.latency_s) || e.latency_s < 0 || !std::isfinite(e.energy_j) ||
      e.energy_j < 0)
    throw Error(std::string(what) + ": cost entries must be finite and non-negative");
}

CostEntry parse_entry(const Json& j, const std::string& ctx) {
  detail::require_object(j, ctx);
  detail::reject_unknown(j, {"latency_s", "energy_j"}, ctx);
  return {detail::get_number(j, "latency_s", ctx), detail::get_number(j, "energy_j", ctx)};
}

void check_fraction(double v, std::string_view what) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0)
    throw Error(std::string(what) + ": accuracy must lie in [0, 1]");
}

template <typename Parse>
auto load_with_context(const std::filesystem::path& path, Parse parse) {
  const std::string text = detail::read_file(path);
  try {
    return parse(text);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace

void PlatformModel::validate() const {
  if (name.empty()) throw Error("platform name must not be empty");
  if (bits != 4 && bits != 8 && bits != 16 && bits != 32)
    throw Error("platform " + name + ": bits must be one of 4, 8, 16, 32 (got " +
                std::to_string(bits) + ")");
  for (const auto& [id, entry] : cost_table) check_entry(entry, "platform " + name + " layer " + id);
  if (default_cost) check_entry(*default_cost, "platform " + name + " default_cost");
}

void LinkModel::validate() const {
  const std::string ctx = "link " + name;
  if (!std::isfinite(bandwidth_bps) || bandwidth_bps <= 0)
    throw Error(ctx + ": bandwidth_bps must be finite and positive");
  for (double v : {fixed_latency_s, energy_per_bit_j, fixed_energy_j})
    if (!std::isfinite(v) || v < 0)
      throw Error(ctx + ": latency and energy terms must be finite and non-negative");
}

void AccuracyModel::validate() const {
  if (kind == Kind::constant) check_fraction(constant_top1, "accuracy constant");
  for (const auto& [key, value] : table) check_fraction(value, "accuracy entry " + key);
  if (fallback) check_fraction(*fallback, "accuracy fallback");
}

std::vector<std::string> platform_labels(std::span<const PlatformModel> platforms) {
  std::map<std::string, int> uses;
  for (const auto& p : platforms) ++uses[p.name];
  std::vector<std::string> out;
  for (std::size_t k = 0; k < platforms.size(); ++k)
    out.push_back(uses[platforms[k].name] > 1 ? platforms[k].name + "_" + std::to_string(k)
                                              : platforms[k].name);
  return out;
}

PlatformModel parse_platform(std::string_view text) {
  const Json doc = detail::parse_json(text, "platform");
  detail::require_object(doc, "platform");
  detail::reject_unknown(doc, {"name", "bits", "mem_capacity_bytes", "default_cost", "cost_table"},
                         "platform");
  PlatformModel p;
  p.name = detail::get_string(doc, "name", "platform");
  const std::string ctx = "platform " + p.name;
  const std::uint64_t bits = detail::get_uint(doc, "bits", ctx);
  p.bits = bits > 64 ? 0 : static_cast<int>(bits);
  p.mem_capacity_bytes = detail::get_uint(doc, "mem_capacity_bytes", ctx);
  if (auto it = doc.find("default_cost"); it != doc.end())
    p.default_cost = parse_entry(*it, ctx + " default_cost");
  if (auto it = doc.find("cost_table"); it != doc.end()) {
    detail::require_object(*it, ctx + " cost_table");
    for (const auto& [id, entry] : it->items())
      p.cost_table.emplace(id, parse_entry(entry, ctx + " layer " + id));
  }
  p.validate();
  return p;
}

LinkModel parse_link(std::string_view text) {
  const Json doc = detail::parse_json(text, "link");
  detail::require_object(doc, "link");
  detail::reject_unknown(
      doc, {"name", "bandwidth_bps", "fixed_latency_s", "energy_per_bit_j", "fixed_energy_j"},
      "link");
  LinkModel l;
  l.name = detail::get_string(doc, "name", "link");
  const std::string ctx = "link " + l.name;
  l.bandwidth_bps = detail::get_number(doc, "bandwidth_bps", ctx);
  l.fixed_latency_s = detail::get_number(doc, "fixed_latency_s", ctx);
  l.energy_per_bit_j = detail::get_number(doc, "energy_per_bit_j", ctx);
  l.fixed_energy_j = detail::get_number(doc, "fixed_energy_j", ctx);
  l.validate();
  return l;
}

AccuracyModel parse_accuracy(std::string_view text) {
  const Json doc = detail::parse_json(text, "accuracy");
  detail::require_object(doc, "accuracy");
  const std::string kind = detail::get_string(doc, "kind", "accuracy");
  AccuracyModel m;
  if (kind == "constant") {
    detail::reject_unknown(doc, {"kind", "top1"}, "accuracy");
    m.kind = AccuracyModel::Kind::constant;
    m.constant_top1 = detail::get_number(doc, "top1", "accuracy");
  } else if (kind == "cut_table") {
    detail::reject_unknown(doc, {"kind", "fallback", "entries"}, "accuracy");
    m.kind = AccuracyModel::Kind::cut_table;
    if (auto it = doc.find("fallback"); it != doc.end())
      m.fallback = detail::as_number(*it, "accuracy: field \"fallback\"");
    const Json& entries = detail::require_key(doc, "entries", "accuracy");
    detail::require_object(entries, "accuracy entries");
    for (const auto& [id, v] : entries.items())
      m.table.emplace(id, detail::as_number(v, "accuracy entry " + id));
  } else {
    throw Error("accuracy: unknown kind \"" + kind + "\" (expected constant or cut_table)");
  }
  m.validate();
  return m;
}

PlatformModel load_platform(const std::filesystem::path& path) {
  return load_with_context(path, [](std::string_view t) { return parse_platform(t); });
}

LinkModel load_link(const std::filesystem::path& path) {
  return load_with_context(path, [](std::string_view t) { return parse_link(t); });
}

AccuracyModel load_accuracy(const std::filesystem::path& path) {
  return load_with_context(path, [](std::string_view t) { return parse_accuracy(t); });
}

CostEntry layer_cost(const PlatformModel& platform, std::string_view layer_id) {
  if (auto it = platform.cost_table.find(std::string(layer_id)); it != platform.cost_table.end())
    return it->second;
  if (platform.default_cost) return *platform.default_cost;
  throw Error("uncosted layer " + std::string(layer_id) + " on " + platform.name);
}

CostEntry link_transfer(const LinkModel& link, std::uint64_t bits) {
  const double b = static_cast<double>(bits);
  return {link.fixed_latency_s + b / link.bandwidth_bps,
          link.fixed_energy_j + b * link.energy_per_bit_j};
}

double accuracy_eval(const AccuracyModel& model, const PartitionScheme& scheme,
                     const LayerOrder& order, const DnnGraph& graph,
                     std::span<const PlatformModel> platforms) {
  if (model.kind == AccuracyModel::Kind::constant) return model.constant_top1;

  auto lookup = [&](std::string_view key) {
    if (auto it = model.table.find(key); it != model.table.end()) return it->second;
    if (model.fallback) return *model.fallback;
    throw Error("accuracy table does not cover cut " + std::string(key) +
                " and declares no fallback");
  };
  auto key_before = [&](std::size_t cut) -> std::string {
    if (cut == 0) return std::string(AccuracyModel::kNoLayerKey);
    return graph.layer(order[cut - 1]).id;
  };
  const std::string last_layer = graph.layer(order[order.size() - 1]).id;

  if (scheme.platform_count() == 2) return lookup(key_before(scheme.cuts[0]));

  int widest = 0;
  for (const auto& p : platforms) widest = std::max(widest, p.bits);
  for (std::size_t k = 1; k < platforms.size() && k < scheme.platform_count(); ++k)
    if (platforms[k].bits < widest && platforms[k - 1].bits == widest)
      return lookup(key_before(scheme.cuts[k - 1]));
  if (model.fallback) return *model.fallback;
  return lookup(last_layer);
}

}  // namespace dnnpart
