#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "hodd/schedule.hpp"

namespace hodd {

/// Malformed document or unsupported schema version. Content errors (bad cut
/// ordering, repeated labels) surface as ScheduleError from the constructor.
class ScheduleFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kScheduleSchemaVersion = 1;

/// {"version":1, "K":int, "group":["I","X",...], "cut_times":[...],
///  "labels":[...], "cyclic_closure":bool}. Doubles round-trip exactly.
std::string schedule_to_json(const PulseSchedule& schedule, int indent = 2);
PulseSchedule schedule_from_json(std::string_view text);

void save_schedule(const std::filesystem::path& path, const PulseSchedule& schedule);
PulseSchedule load_schedule(const std::filesystem::path& path);

}  // namespace hodd
