// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dnnpart {

/// Assignment of contiguous runs of the layer order to a chain of platforms.
///
/// For N platforms there are N-1 non-decreasing cut positions in [0, L].
/// Platform k runs positions [cuts[k-1], cuts[k]) with cuts[-1] = 0 and
/// cuts[N-1] = L. Empty segments are allowed and mean the platform is skipped.
struct PartitionScheme {
  std::vector<std::size_t> cuts;

  std::size_t platform_count() const { return cuts.size() + 1; }
  std::size_t segment_begin(std::size_t k) const { return k == 0 ? 0 : cuts[k - 1]; }
  std::size_t segment_end(std::size_t k, std::size_t layer_count) const {
    return k < cuts.size() ? cuts[k] : layer_count;
  }
  /// Number of non-empty segments.
  std::size_t partition_count(std::size_t layer_count) const;

  auto operator<=>(const PartitionScheme&) const = default;
};

/// Throws Error unless the scheme has platform_count - 1 monotone cuts within
/// [0, layer_count].
void validate_scheme(const PartitionScheme& scheme, std::size_t platform_count,
                     std::size_t layer_count);

/// "3,7" style rendering used in CSV and on the command line.
std::string format_cuts(const PartitionScheme& scheme);
PartitionScheme parse_cuts(std::string_view text);

}  // namespace dnnpart
