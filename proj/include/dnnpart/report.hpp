// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dnnpart/evaluator.hpp"

namespace dnnpart {

/// Shortest round-trip decimal form; "inf" for +infinity.
std::string format_double(double v);

/// ';' separated, '.' decimal point, header row first:
/// cuts;latency_s;energy_j;throughput_fps;link_bits_total;mem_<p>_bytes...;top1;feasible;violated
std::string evaluation_csv(std::span<const EvaluationRecord> records,
                           std::span<const PlatformModel> platforms);

/// Per-cut memory of the first and last platform: row c puts order[0, c) on
/// the first platform and the rest on the last. L + 1 rows.
std::string memory_profile_csv(const SystemSpec& sys);

nlohmann::json record_to_json(const EvaluationRecord& rec, const SystemSpec& sys);

}  // namespace dnnpart
