// SPDX-License-Identifier: Apache-2.0
#include "dnnpart/scheme.hpp"

#include <charconv>

#include "dnnpart/error.hpp"

namespace dnnpart {

std::size_t PartitionScheme::partition_count(std::size_t layer_count) const {
  std::size_t count = 0;
  for (std::size_t k = 0; k < platform_count(); ++k)
    if (segment_end(k, layer_count) > segment_begin(k)) ++count;
  return count;
}

void validate_scheme(const PartitionScheme& scheme, std::size_t platform_count,
                     std::size_t layer_count) {
  if (scheme.platform_count() != platform_count)
    throw Error("scheme [" + format_cuts(scheme) + "] has " + std::to_string(scheme.cuts.size()) +
                " cuts, expected " + std::to_string(platform_count - 1));
  std::size_t previous = 0;
  for (std::size_t c : scheme.cuts) {
    if (c > layer_count)
      throw Error("scheme [" + format_cuts(scheme) + "]: cut " + std::to_string(c) +
                  " exceeds layer count " + std::to_string(layer_count));
    if (c < previous)
      throw Error("scheme [" + format_cuts(scheme) + "]: cuts must be non-decreasing");
    previous = c;
  }
}

std::string format_cuts(const PartitionScheme& scheme) {
  std::string out;
  for (std::size_t k = 0; k < scheme.cuts.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(scheme.cuts[k]);
  }
  return out;
}

PartitionScheme parse_cuts(std::string_view text) {
  PartitionScheme scheme;
  if (text.empty()) return scheme;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = text.find(',', start);
    const std::string_view item =
        text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size())
      throw Error("invalid cut list \"" + std::string(text) + "\"");
    scheme.cuts.push_back(value);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return scheme;
}

}  // namespace dnnpart
