#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "hodd/schedule.hpp"

namespace hodd {

/// Published optimized segment lengths for the X -> Z -> X -> Z pattern,
/// orders 1 through kPublishedMaxOrder, 3K + 1 lengths per order.
inline constexpr int kPublishedMaxOrder = 8;

/// Raw text of the embedded table, one "K: d1, d2, ..." row per order.
std::string_view published_table_text();

/// Segment lengths for order K exactly as printed (15 decimals, unnormalized).
const std::vector<double>& published_intervals(int order);

/// Schedule on {I,X,Y,Z} built from the published lengths, with closure.
PulseSchedule published_schedule(int order);

}  // namespace hodd
