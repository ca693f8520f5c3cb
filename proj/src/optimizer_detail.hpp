// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "dnnpart/optimizer.hpp"

namespace dnnpart::detail {

// Builds the Exploration for a set of records already ordered by scheme.
Exploration summarize(std::vector<EvaluationRecord> evaluated, std::span<const Metric> objectives);

std::vector<EvaluationRecord> evaluate_batch(const SystemSpec& sys,
                                             std::span<const PartitionScheme> schemes,
                                             std::size_t threads);

}  // namespace dnnpart::detail
