#include "hodd/schedule_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace hodd {

using nlohmann::json;

std::string schedule_to_json(const PulseSchedule& schedule, int indent) {
  json group = json::array();
  for (const auto& g : schedule.group().elements()) group.push_back(g.str());
  json doc = {
      {"version", kScheduleSchemaVersion},
      {"K", schedule.order()},
      {"group", std::move(group)},
      {"cut_times", schedule.cut_times()},
      {"labels", schedule.labels()},
      {"cyclic_closure", schedule.cyclic_closure()},
  };
  return doc.dump(indent);
}

PulseSchedule schedule_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScheduleFormatError(std::string("schedule is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ScheduleFormatError("schedule document must be a JSON object");
  for (const char* key : {"version", "K", "group", "cut_times", "labels", "cyclic_closure"}) {
    if (!doc.contains(key)) throw ScheduleFormatError(std::string("schedule is missing \"") + key + "\"");
  }
  try {
    const int version = doc.at("version").get<int>();
    if (version != kScheduleSchemaVersion) {
      throw ScheduleFormatError("unsupported schedule version " + std::to_string(version) + " (expected " +
                                std::to_string(kScheduleSchemaVersion) + ")");
    }
    std::vector<PauliString> elements;
    for (const auto& s : doc.at("group")) elements.push_back(PauliString::parse(s.get<std::string>()));
    auto group = DecouplingGroup::from_elements(std::move(elements));
    return PulseSchedule(std::move(group), doc.at("cut_times").get<std::vector<double>>(),
                         doc.at("labels").get<std::vector<std::size_t>>(), doc.at("cyclic_closure").get<bool>(),
                         doc.at("K").get<int>());
  } catch (const json::exception& e) {
    throw ScheduleFormatError(std::string("schedule field has the wrong type: ") + e.what());
  }
}

void save_schedule(const std::filesystem::path& path, const PulseSchedule& schedule) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << schedule_to_json(schedule) << '\n';
}

PulseSchedule load_schedule(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScheduleFormatError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return schedule_from_json(buf.str());
}

}  // namespace hodd
