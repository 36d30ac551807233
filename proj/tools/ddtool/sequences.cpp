#include "sequences.hpp"

#include "config.hpp"
#include "hodd/generators.hpp"
#include "hodd/published.hpp"
#include "hodd/schedule_io.hpp"

namespace ddtool {

namespace {

int order_argument(std::string_view source, std::string_view arg, int lo, int hi) {
  const auto v = parse_int(arg, source);
  if (v < lo || v > hi) {
    throw ConfigError(std::string(source) + ": value must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<int>(v);
}

}  // namespace

ResolvedSequence resolve_sequence(std::string_view source, const std::filesystem::path& base,
                                  std::vector<FileDigest>* inputs) {
  const auto colon = source.find(':');
  const std::string_view kind = source.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : source.substr(colon + 1);
  const std::string id(source);
  const auto need_arg = [&] {
    if (arg.empty()) throw ConfigError("sequence '" + id + "' needs an argument after ':'");
  };

  if (kind == "table-s1") {
    need_arg();
    const int k = order_argument(source, arg, 1, hodd::kPublishedMaxOrder);
    return {{id, k, hodd::published_schedule(k)}, hodd::published_intervals(k)};
  }
  if (kind == "generated") {
    need_arg();
    hodd::OptimizerConfig config;
    config.order = order_argument(source, arg, 1, 64);
    auto generated = hodd::optimize_schedule(config);
    if (!generated.result.converged || !generated.result.verification.pass) {
      throw NumericalError("optimizer did not reach order " + std::string(arg) + " for '" + id + "'");
    }
    return {{id, config.order, std::move(generated.schedule)}, std::nullopt};
  }
  if (kind == "qdd") {
    need_arg();
    const int k = order_argument(source, arg, 1, 64);
    return {{id, k, hodd::qdd_schedule(k)}, std::nullopt};
  }
  if (kind == "udd") {
    need_arg();
    const int n = order_argument(source, arg, 1, 1000);
    return {{id, n, hodd::udd_schedule(n, hodd::PauliString::parse("X"))}, std::nullopt};
  }
  if (kind == "xy4") {
    if (!arg.empty()) throw ConfigError("sequence 'xy4' takes no argument");
    return {{id, 1, hodd::periodic_schedule(4)}, std::nullopt};
  }
  if (kind == "periodic") {
    need_arg();
    const int segments = order_argument(source, arg, 2, 100000);
    auto schedule = hodd::periodic_schedule(static_cast<std::size_t>(segments));
    const int order = schedule.order();
    return {{id, order, std::move(schedule)}, std::nullopt};
  }
  if (kind == "file") {
    need_arg();
    std::filesystem::path path{std::string(arg)};
    if (path.is_relative()) path = base / path;
    auto schedule = hodd::load_schedule(path);
    if (inputs) inputs->push_back({path.string(), sha256_file(path)});
    const int order = schedule.order();
    return {{id, order, std::move(schedule)}, std::nullopt};
  }
  throw ConfigError("unknown sequence source '" + id + "'");
}

}  // namespace ddtool
