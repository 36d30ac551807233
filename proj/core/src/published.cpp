#include "hodd/published.hpp"

#include <array>
#include <charconv>
#include <stdexcept>
#include <string>

#include "hodd/generators.hpp"

namespace hodd {

namespace detail {
extern const std::string_view kPublishedTableText;
}  // namespace detail

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view s) {
  s = trim(s);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("bad number in published table: '" + std::string(s) + "'");
  }
  return value;
}

using Table = std::array<std::vector<double>, kPublishedMaxOrder + 1>;

Table parse_table(std::string_view text) {
  Table table;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = trim(text.substr(0, eol));
    text = (eol == std::string_view::npos) ? std::string_view{} : text.substr(eol + 1);
    if (line.empty() || line.front() == '#') continue;

    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw std::runtime_error("published table row lacks ':'");
    const int order = static_cast<int>(parse_double(line.substr(0, colon)));
    if (order < 1 || order > kPublishedMaxOrder) throw std::runtime_error("published table order out of range");
    std::string_view rest = line.substr(colon + 1);
    auto& row = table[static_cast<std::size_t>(order)];
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      row.push_back(parse_double(rest.substr(0, comma)));
      rest = (comma == std::string_view::npos) ? std::string_view{} : rest.substr(comma + 1);
    }
    if (row.size() != 3 * static_cast<std::size_t>(order) + 1) {
      throw std::runtime_error("published table row " + std::to_string(order) + " has the wrong length");
    }
  }
  return table;
}

const Table& table() {
  static const Table t = parse_table(detail::kPublishedTableText);
  return t;
}

}  // namespace

std::string_view published_table_text() { return detail::kPublishedTableText; }

const std::vector<double>& published_intervals(int order) {
  if (order < 1 || order > kPublishedMaxOrder) {
    throw std::out_of_range("published timings exist for orders 1.." + std::to_string(kPublishedMaxOrder));
  }
  return table()[static_cast<std::size_t>(order)];
}

PulseSchedule published_schedule(int order) {
  const auto& intervals = published_intervals(order);
  auto group = DecouplingGroup::single_qubit_universal();
  const std::vector<PauliString> pattern{PauliString::parse("X"), PauliString::parse("Z")};
  auto labels = traversal_pattern(group, pattern, intervals.size());
  return PulseSchedule::from_intervals(std::move(group), intervals, std::move(labels), true, order);
}

}  // namespace hodd
