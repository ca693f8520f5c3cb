// SPDX-License-Identifier: Apache-2.0
#include "dnnpart/run.hpp"

#include <chrono>
#include <fstream>
#include <ostream>

#include "dnnpart/error.hpp"
#include "dnnpart/report.hpp"
#include "json_util.hpp"

namespace dnnpart {

namespace {

using detail::Json;
constexpr const char* kVersion = "1.0.0";

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << content;
  if (!f) throw Error("failed writing " + path.string());
}

std::optional<double> optional_bound(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) return std::nullopt;
  return detail::as_number(*it, std::string("constraint ") + key);
}

const char* order_mode_name(OrderMode m) { return m == OrderMode::memory ? "memory" : "random"; }

const char* run_mode_name(RunMode m) {
  switch (m) {
    case RunMode::explore: return "explore";
    case RunMode::exhaustive: return "exhaustive";
    case RunMode::evaluate_one: return "evaluate-one";
  }
  return "?";
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

}  // namespace

RunMode parse_run_mode(std::string_view text) {
  if (text == "explore") return RunMode::explore;
  if (text == "exhaustive") return RunMode::exhaustive;
  if (text == "evaluate-one") return RunMode::evaluate_one;
  throw Error("unknown mode \"" + std::string(text) + "\" (expected explore, exhaustive or evaluate-one)");
}

OrderMode parse_order_mode(std::string_view text) {
  if (text == "memory") return OrderMode::memory;
  if (text == "random") return OrderMode::random;
  throw Error("unknown order \"" + std::string(text) + "\" (expected memory or random)");
}

std::vector<std::pair<Metric, double>> parse_weight_list(std::string_view text) {
  std::vector<std::pair<Metric, double>> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    const std::string_view item = text.substr(start, comma - start);
    const std::size_t colon = item.find(':');
    if (colon == std::string_view::npos)
      throw Error("invalid weight \"" + std::string(item) + "\" (expected metric:coefficient)");
    const std::string number(item.substr(colon + 1));
    std::size_t used = 0;
    double c = 0.0;
    try {
      c = std::stod(number, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (number.empty() || used != number.size())
      throw Error("invalid weight coefficient \"" + number + "\"");
    out.emplace_back(parse_metric(item.substr(0, colon)), c);
    start = comma + 1;
  }
  return out;
}

ObjectiveSettings parse_objective_settings(std::string_view text) {
  const Json doc = detail::parse_json(text, "constraints");
  detail::require_object(doc, "constraints document");
  detail::reject_unknown(doc, {"constraints", "weights", "references"}, "constraints document");
  ObjectiveSettings s;
  if (auto it = doc.find("constraints"); it != doc.end()) {
    detail::require_object(*it, "constraints");
    detail::reject_unknown(*it,
                           {"max_latency_s", "max_energy_j", "min_throughput_fps", "max_link_bits",
                            "min_top1"},
                           "constraints");
    s.constraints.max_latency_s = optional_bound(*it, "max_latency_s");
    s.constraints.max_energy_j = optional_bound(*it, "max_energy_j");
    s.constraints.min_throughput_fps = optional_bound(*it, "min_throughput_fps");
    s.constraints.max_link_bits = optional_bound(*it, "max_link_bits");
    s.constraints.min_top1 = optional_bound(*it, "min_top1");
  }
  if (auto it = doc.find("weights"); it != doc.end()) {
    detail::require_object(*it, "weights");
    for (const auto& [name, value] : it->items())
      s.weights.entries.emplace_back(parse_metric(name), detail::as_number(value, "weight " + name));
  }
  if (auto it = doc.find("references"); it != doc.end()) {
    if (it->is_string()) {
      if (it->get<std::string>() != "auto")
        throw Error("references must be \"auto\" or an object of metric values");
    } else {
      detail::require_object(*it, "references");
      for (const auto& [name, value] : it->items())
        s.weights.references[parse_metric(name)] = detail::as_number(value, "reference " + name);
    }
  }
  s.constraints.validate();
  return s;
}

std::vector<Metric> default_objectives() {
  return {Metric::latency, Metric::energy, Metric::throughput};
}

SystemSpec load_system(const RunConfig& config) {
  if (config.platform_paths.empty()) throw Error("at least one --platform is required");
  if (config.link_paths.size() + 1 != config.platform_paths.size())
    throw Error(std::to_string(config.platform_paths.size()) + " platforms need " +
                std::to_string(config.platform_paths.size() - 1) + " --link files, got " +
                std::to_string(config.link_paths.size()));

  DnnGraph graph = load_graph(config.graph_path);
  std::vector<PlatformModel> platforms;
  for (const auto& p : config.platform_paths) platforms.push_back(load_platform(p));
  std::vector<LinkModel> links;
  for (const auto& p : config.link_paths) links.push_back(load_link(p));
  AccuracyModel accuracy;
  if (config.accuracy_path) accuracy = load_accuracy(*config.accuracy_path);

  ObjectiveSettings settings;
  if (config.constraints_path) {
    const std::string text = detail::read_file(*config.constraints_path);
    try {
      settings = parse_objective_settings(text);
    } catch (const Error& e) {
      throw Error(config.constraints_path->string() + ": " + e.what());
    }
  }
  if (config.weights) settings.weights.entries = parse_weight_list(*config.weights);
  if (settings.weights.entries.empty()) settings.weights.entries = {{Metric::latency, 1.0}};

  for (std::size_t k = 0; k < platforms.size(); ++k)
    for (const auto& layer : graph.layers()) {
      try {
        (void)layer_cost(platforms[k], layer.id);
      } catch (const Error& e) {
        throw Error(config.platform_paths[k].string() + ": " + e.what());
      }
    }

  LayerOrder order;
  std::vector<RegionSchedule> regions;
  if (config.order == OrderMode::memory) {
    ScheduledOrder scheduled = memory_aware_order(graph, config.seed);
    order = std::move(scheduled.order);
    regions = std::move(scheduled.regions);
  } else {
    order = topo_order(graph, config.seed);
  }

  SystemSpec sys{std::move(graph),        std::move(order),    std::move(platforms),
                 std::move(links),        std::move(accuracy), settings.constraints,
                 settings.weights,        std::move(regions)};
  sys.validate();
  return sys;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  try {
    const SystemSpec sys = load_system(config);
    const double load_s = seconds_since(started);

    if (config.mode == RunMode::evaluate_one) {
      const PartitionScheme scheme = parse_cuts(config.cuts);
      validate_scheme(scheme, sys.platform_count(), sys.layer_count());
      const EvaluationRecord rec = evaluate_scheme(scheme, sys);
      Json j = record_to_json(rec, sys);
      j["weighted_cost"] = weighted_cost(rec, resolve_references(sys.weights, sys));
      out << j.dump(2) << "\n";
      return kExitOk;
    }

    const std::vector<Metric> objectives = config.objectives.value_or(default_objectives());
    const ObjectiveWeights weights = resolve_references(sys.weights, sys);

    const auto search_started = std::chrono::steady_clock::now();
    Exploration ex;
    Json ga = nullptr;
    if (config.mode == RunMode::explore) {
      GaParams params = GaParams::defaults(sys.layer_count(), sys.platform_count());
      if (config.population) params.population = *config.population;
      if (config.generations) params.generations = *config.generations;
      params.seed = config.seed;
      params.objectives = objectives;
      params.threads = config.threads;
      ex = nsga2(sys, params);
      ga = {{"population", params.population},
            {"population_source", config.population ? "flag" : "derived from layer count"},
            {"generations", params.generations},
            {"generations_source", config.generations ? "flag" : "derived from layer count"},
            {"crossover_rate", params.crossover_rate},
            {"mutation_rate", params.mutation_rate}};
    } else {
      ex = exhaustive_pareto(sys, objectives, config.threads);
    }
    const double search_s = seconds_since(search_started);

    std::filesystem::create_directories(config.output_dir);
    write_file(config.output_dir / "evaluations.csv", evaluation_csv(ex.evaluated, sys.platforms));
    write_file(config.output_dir / "pareto.csv", evaluation_csv(ex.front.members, sys.platforms));
    write_file(config.output_dir / "memory_profile.csv", memory_profile_csv(sys));

    Json objective_names = Json::array();
    for (Metric m : objectives) objective_names.push_back(metric_name(m));
    Json summary = Json::object();
    Json front = Json::array();
    for (const auto& r : ex.front.members) front.push_back(record_to_json(r, sys));
    summary["front"] = std::move(front);
    summary["objectives"] = objective_names;
    if (!ex.front.members.empty()) {
      const EvaluationRecord& chosen = select_final(ex.front, weights);
      summary["selected"] = record_to_json(chosen, sys);
      summary["selected"]["weighted_cost"] = weighted_cost(chosen, weights);
    } else {
      summary["selected"] = nullptr;
    }
    summary["evaluations"] = ex.evaluations;
    summary["generations_run"] = ex.generations_run;
    summary["diagnostics"] = ex.diagnostics;
    write_file(config.output_dir / "selected.json", summary.dump(2) + "\n");

    Json manifest = Json::object();
    manifest["tool"] = "dnnpart";
    manifest["version"] = kVersion;
    manifest["mode"] = run_mode_name(config.mode);
    manifest["seed"] = config.seed;
    Json inputs = Json::object();
    inputs["graph"] = config.graph_path.string();
    inputs["platforms"] = Json::array();
    for (const auto& p : config.platform_paths) inputs["platforms"].push_back(p.string());
    inputs["links"] = Json::array();
    for (const auto& p : config.link_paths) inputs["links"].push_back(p.string());
    inputs["accuracy"] = config.accuracy_path ? Json(config.accuracy_path->string()) : Json(nullptr);
    inputs["constraints"] =
        config.constraints_path ? Json(config.constraints_path->string()) : Json(nullptr);
    manifest["inputs"] = std::move(inputs);
    manifest["layer_count"] = sys.layer_count();
    manifest["platform_count"] = sys.platform_count();
    manifest["scheme_space"] = scheme_count(sys.layer_count(), sys.platform_count());
    std::size_t heuristic_regions = 0;
    for (const auto& r : sys.region_schedules) heuristic_regions += r.heuristic ? 1 : 0;
    manifest["order"] = {{"mode", order_mode_name(config.order)},
                         {"branch_regions", sys.region_schedules.size()},
                         {"heuristic_regions", heuristic_regions},
                         {"region_order_limit", kDefaultOrderLimit},
                         {"layers", sys.order.ids(sys.graph)}};
    manifest["objectives"] = objective_names;
    Json w = Json::object();
    for (const auto& [m, c] : weights.entries) w[std::string(metric_name(m))] = c;
    manifest["weights"] = std::move(w);
    Json refs = Json::object();
    for (const auto& [m, r] : weights.references) refs[std::string(metric_name(m))] = r;
    manifest["references"] = std::move(refs);
    manifest["ga"] = std::move(ga);
    manifest["threads"] = config.threads;
    manifest["evaluations"] = ex.evaluations;
    manifest["generations_run"] = ex.generations_run;
    manifest["feasible_front_size"] = ex.front.members.size();
    manifest["timing_s"] = {{"load", load_s}, {"search", search_s}, {"total", seconds_since(started)}};
    write_file(config.output_dir / "run_manifest.json", manifest.dump(2) + "\n");

    if (ex.front.members.empty()) {
      for (const auto& d : ex.diagnostics) err << d << "\n";
      return kExitInfeasible;
    }
    const EvaluationRecord& chosen = select_final(ex.front, weights);
    out << "selected cuts [" << format_cuts(chosen.scheme) << "], " << ex.front.members.size()
        << " Pareto-optimal of " << ex.evaluations << " evaluated; results in "
        << config.output_dir.string() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

}  // namespace dnnpart
