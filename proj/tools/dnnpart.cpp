// SPDX-License-Identifier: Apache-2.0
//
// dnnpart: layer-wise partitioning of a DNN across a chain of accelerators.

#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "dnnpart/error.hpp"
#include "dnnpart/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Pareto-optimal DNN inference partitioning over a chain of accelerators"};

  dnnpart::RunConfig config;
  std::string graph, mode = "explore", order = "memory", objectives, weights;
  std::vector<std::string> platforms, links;
  std::string accuracy, constraints, out = "out";
  std::size_t pop = 0, gens = 0;

  app.add_option("--graph", graph, "Graph JSON")->required();
  app.add_option("--platform", platforms, "Platform JSON, repeat in chain order")->required();
  app.add_option("--link", links, "Link JSON between consecutive platforms, repeat in order");
  app.add_option("--accuracy", accuracy, "Accuracy model JSON (default: constant 1.0)");
  app.add_option("--constraints", constraints, "Constraints / weights / references JSON");
  app.add_option("--weights", weights, "Weights, e.g. latency:1,energy:0.5 (overrides file)");
  app.add_option("--objectives", objectives,
                 "Pareto objectives, e.g. latency,energy (default latency,energy,throughput)");
  app.add_option("--seed", config.seed, "Seed for layer-order tie-breaking and the GA");
  app.add_option("--pop", pop, "GA population (default derived from layer count)");
  app.add_option("--gens", gens, "GA generations (default derived from layer count)");
  app.add_option("--out", out, "Output directory");
  app.add_option("--mode", mode, "explore | exhaustive | evaluate-one");
  app.add_option("--cuts", config.cuts, "Cut positions for evaluate-one, e.g. 3 or 2,5");
  app.add_option("--order", order, "Layer order: memory (default) | random");

  CLI11_PARSE(app, argc, argv);

  try {
    config.graph_path = graph;
    for (const auto& p : platforms) config.platform_paths.emplace_back(p);
    for (const auto& l : links) config.link_paths.emplace_back(l);
    if (!accuracy.empty()) config.accuracy_path = accuracy;
    if (!constraints.empty()) config.constraints_path = constraints;
    if (!weights.empty()) config.weights = weights;
    if (!objectives.empty()) config.objectives = dnnpart::parse_metric_list(objectives);
    if (pop) config.population = pop;
    if (gens) config.generations = gens;
    config.output_dir = out;
    config.mode = dnnpart::parse_run_mode(mode);
    config.order = dnnpart::parse_order_mode(order);
    if (config.mode == dnnpart::RunMode::evaluate_one && config.cuts.empty() && platforms.size() > 1)
      throw dnnpart::Error("--mode evaluate-one needs --cuts");

    config.threads = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("DNNPART_THREADS")) {
      const long cap = std::strtol(env, nullptr, 10);
      if (cap < 1) throw dnnpart::Error("DNNPART_THREADS must be a positive integer");
      config.threads = std::min<std::size_t>(config.threads, static_cast<std::size_t>(cap));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dnnpart::kExitInputError;
  }

  return dnnpart::run(config, std::cout, std::cerr);
}
