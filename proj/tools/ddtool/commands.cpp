#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "cli.hpp"
#include "config.hpp"
#include "hodd/analysis.hpp"
#include "hodd/generators.hpp"
#include "hodd/published.hpp"
#include "hodd/schedule_io.hpp"
#include "hodd/seeding.hpp"
#include "hodd/version.hpp"
#include "manifest.hpp"
#include "sequences.hpp"

namespace ddtool {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fixed15(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15f", v);
  return buf;
}

std::string g17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

struct Run {
  fs::path out_dir;
  RunManifest manifest;
  std::ostream& out;
  std::ostream& err;

  fs::path write(const std::string& name, const std::string& content) {
    fs::create_directories(out_dir);
    const fs::path path = out_dir / name;
    {
      std::ofstream f(path, std::ios::binary | std::ios::trunc);
      if (!f) throw std::runtime_error("cannot write " + path.string());
      f << content;
    }
    manifest.outputs.push_back({path.string(), sha256_hex(content)});
    out << "wrote " << path.string() << '\n';
    return path;
  }
};

std::vector<double> time_grid(double lo, double hi, int points) {
  if (points < 2) throw ConfigError("T grid needs at least two points");
  if (!(lo > 0.0) || !(hi > lo)) throw ConfigError("T grid needs 0 < T_min < T_max");
  return hodd::log_grid(lo, hi, static_cast<std::size_t>(points));
}

std::vector<hodd::PauliString> parse_axes(const std::string& text, std::size_t qubits) {
  if (text.empty()) return hodd::weight_one_axes(qubits);
  std::vector<hodd::PauliString> axes;
  for (const auto& item : split_list(text)) axes.push_back(hodd::PauliString::parse(item));
  return axes;
}

void print_intervals(std::ostream& out, const std::vector<double>& intervals) {
  out << "  segment  length\n";
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    char idx[16];
    std::snprintf(idx, sizeof idx, "%9zu", i + 1);
    out << idx << "  " << fixed15(intervals[i]) << '\n';
  }
}

void print_pulse_counts(std::ostream& out, const hodd::PulseSchedule& s) {
  out << "pulses: " << s.interior_pulse_count() << " interior"
      << (s.needs_closure_pulse() ? " + 1 closure" : "") << " = " << s.pulse_count() << '\n';
}

// ---------------------------------------------------------------- generate

struct GenerateOptions {
  int order = 1;
  std::string pattern = "XZ";
  int restarts = 20;
  std::uint64_t seed = 0;
  int max_evaluations = 100000;
  std::string jacobian = "analytic";
  bool table = false;
  std::string output;
  int jobs = 1;
};

int cmd_generate(Run& run, const GenerateOptions& o) {
  run.manifest.config = {{"K", o.order},           {"pattern", o.pattern},   {"restarts", o.restarts},
                         {"seed", o.seed},         {"max_evals", o.max_evaluations}, {"jacobian", o.jacobian},
                         {"table_s1", o.table},    {"jobs", o.jobs}};
  run.manifest.master_seed = o.seed;
  const std::string name = o.output.empty() ? "schedule_K" + std::to_string(o.order) + ".json" : o.output;
  const auto axes = hodd::weight_one_axes(1);

  if (o.table) {
    if (o.order > hodd::kPublishedMaxOrder) throw ConfigError("published timings cover K <= 8");
    const auto schedule = hodd::published_schedule(o.order);
    const auto check = hodd::verify_order(schedule, axes, o.order, hodd::kPublishedTolerance);
    run.out << "published timings, K = " << o.order << '\n';
    print_intervals(run.out, hodd::published_intervals(o.order));
    print_pulse_counts(run.out, schedule);
    run.out << "max |M| = " << sci(check.worst_residual) << (check.pass ? " (pass" : " (FAIL") << " at "
            << sci(hodd::kPublishedTolerance) << ")\n";
    run.write(name, hodd::schedule_to_json(schedule));
    return check.pass ? kExitSuccess : kExitVerificationFailed;
  }

  hodd::OptimizerConfig config;
  config.order = o.order;
  config.pattern.clear();
  for (char c : o.pattern) {
    if (c == ',' || c == ' ') continue;
    config.pattern.push_back(hodd::PauliString::parse(std::string(1, c)));
  }
  if (config.pattern.empty()) throw ConfigError("pattern is empty");
  config.restarts = o.restarts;
  config.seed = o.seed;
  config.max_evaluations = o.max_evaluations;
  config.jobs = o.jobs;
  if (o.jacobian == "analytic") config.jacobian = hodd::JacobianMode::analytic;
  else if (o.jacobian == "forward") config.jacobian = hodd::JacobianMode::forward_difference;
  else throw ConfigError("jacobian must be 'analytic' or 'forward'");

  const auto group = hodd::DecouplingGroup::single_qubit_universal();
  const auto generated = hodd::optimize_schedule(config, group, axes);
  const auto& r = generated.result;
  run.out << "optimized timings, K = " << o.order << " (" << r.intervals.size() << " segments)\n";
  print_intervals(run.out, r.intervals);
  print_pulse_counts(run.out, generated.schedule);
  run.out << "Phi = " << sci(r.cost) << ", max |M| = " << sci(r.verification.worst_residual)
          << (r.verification.pass ? " (pass" : " (FAIL") << " at " << sci(config.verify_tolerance) << ")\n";
  run.out << "stop: " << hodd::to_string(r.stop_reason) << " after " << r.evaluations << " evaluations (start "
          << r.restart << ", " << r.total_evaluations << " in total)" << (r.collapsed ? ", collapsed" : "") << '\n';
  run.write(name, hodd::schedule_to_json(generated.schedule));
  if (!r.converged || !r.verification.pass) {
    run.err << "optimizer did not converge; best-so-far schedule saved\n";
    return kExitNumerical;
  }
  return kExitSuccess;
}

// ---------------------------------------------------------------- verify

struct VerifyOptions {
  std::string path;
  int order = -1;
  double tolerance = hodd::kOptimizedTolerance;
  std::string axes;
};

int cmd_verify(Run& run, const VerifyOptions& o) {
  run.manifest.config = {{"schedule", o.path}, {"K", o.order}, {"tol", o.tolerance}, {"axes", o.axes}};
  const fs::path path(o.path);
  const auto schedule = hodd::load_schedule(path);
  run.manifest.inputs.push_back({path.string(), sha256_file(path)});
  const int order = o.order >= 0 ? o.order : schedule.order();
  if (order < 1) throw ConfigError("schedule declares no order; pass --K");
  if (!(o.tolerance > 0.0)) throw ConfigError("--tol must be positive");
  const auto axes = parse_axes(o.axes, schedule.num_qubits());
  const auto mv = hodd::moments(hodd::switching_profile(schedule, axes, hodd::ProfileCheck::none), order);
  const auto check = hodd::verify_order(schedule, axes, order, o.tolerance);

  run.out << "schedule " << path.string() << ": " << schedule.num_segments() << " segments, ";
  print_pulse_counts(run.out, schedule);
  run.out << "  axis    m  M\n";
  for (std::size_t a = 0; a < axes.size(); ++a) {
    for (int m = 0; m < order; ++m) {
      char line[128];
      std::snprintf(line, sizeof line, "  %-6s %2d  %+.3e\n", axes[a].str().c_str(), m, mv.at(a, m));
      run.out << line;
    }
  }
  run.out << (check.pass ? "PASS" : "FAIL") << ": max |M| = " << sci(check.worst_residual) << " (axis "
          << axes[check.worst_axis].str() << ", m = " << check.worst_power << ") against tol " << sci(o.tolerance)
          << " through K = " << order << '\n';
  run.write("verify.json", json{{"schedule", path.string()},
                                {"K", order},
                                {"tol", o.tolerance},
                                {"pass", check.pass},
                                {"worst_residual", check.worst_residual},
                                {"worst_axis", axes[check.worst_axis].str()},
                                {"worst_power", check.worst_power}}
                                   .dump(2) +
                               "\n");
  return check.pass ? kExitSuccess : kExitVerificationFailed;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string schedule_file;
  std::string sequence;
  double coupling = 1e-3;
  std::vector<double> times;
  std::uint64_t seed = 1;
  std::size_t states = 100;
  std::uint64_t master_seed = 0;
  bool magnus = false;
};

ResolvedSequence sequence_from(Run& run, const std::string& file, const std::string& source) {
  if (file.empty() == source.empty()) throw ConfigError("give exactly one of --schedule or --sequence");
  if (!file.empty()) return resolve_sequence("file:" + file, fs::current_path(), &run.manifest.inputs);
  return resolve_sequence(source, fs::current_path(), &run.manifest.inputs);
}

int cmd_simulate(Run& run, const SimulateOptions& o) {
  run.manifest.config = {{"schedule", o.schedule_file}, {"sequence", o.sequence}, {"J", o.coupling},
                         {"T", o.times},                {"seed", o.seed},         {"states", o.states},
                         {"master_seed", o.master_seed}, {"magnus", o.magnus}};
  run.manifest.master_seed = o.master_seed;
  if (o.times.empty()) throw ConfigError("--T needs at least one value");
  for (double t : o.times) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("--T values must be finite and >= 0");
  }
  const auto seq = sequence_from(run, o.schedule_file, o.sequence);
  const auto model = hodd::sample_model(o.seed, o.coupling);
  const auto states = hodd::haar_product_states(o.states, hodd::derive_seed(o.master_seed, {o.seed}));

  std::string csv = "sequence_id,K,J,T,seed,metric,value\n";
  const auto row = [&](double t, const char* metric, double v) {
    csv += seq.named.id + ',' + std::to_string(seq.named.order) + ',' + g17(o.coupling) + ',' + g17(t) + ',' +
           std::to_string(o.seed) + ',' + metric + ',' + g17(v) + '\n';
  };
  run.out << "       T            ||U-U0||     mean trace dist" << (o.magnus ? "  ||Omega_1||" : "") << '\n';
  for (double t : o.times) {
    hodd::EvolveOptions eo;
    eo.compute_first_magnus = o.magnus;
    const auto ev = hodd::evolve(seq.named.schedule, model, t, eo);
    double mean_td = 0.0;
    if (!states.empty()) {
      const auto d = hodd::reduced_error(ev, model, states);
      for (double v : d) mean_td += v;
      mean_td /= static_cast<double>(d.size());
    }
    row(t, "operator_norm", ev.error);
    if (!states.empty()) row(t, "mean_trace_distance", mean_td);
    if (ev.first_magnus_norm) row(t, "first_magnus_norm", *ev.first_magnus_norm);
    char line[160];
    std::snprintf(line, sizeof line, "  %.6e  %.6e  %.6e", t, ev.error, mean_td);
    run.out << line;
    if (ev.first_magnus_norm) run.out << "  " << sci(*ev.first_magnus_norm);
    run.out << '\n';
    if (ev.magnus_regime_warning) {
      run.err << "warning: J T = " << sci(o.coupling * t) << " >= pi, outside the Magnus convergence range\n";
    }
  }
  run.write("simulate_seed" + std::to_string(o.master_seed) + ".csv", csv);
  return kExitSuccess;
}

// ---------------------------------------------------------------- sweep

struct SweepOptions {
  std::string config;
  int jobs = 1;
};

int cmd_sweep(Run& run, const SweepOptions& o) {
  const fs::path path(o.config);
  const auto cfg = KeyValueConfig::load(path, "hodd-sweep", 1);
  run.manifest.inputs.push_back({path.string(), sha256_file(path)});
  run.manifest.config = cfg.snapshot();
  run.manifest.config["jobs"] = o.jobs;
  cfg.require_known({"format", "sequences", "J", "T_min", "T_max", "T_points", "seeds", "states", "metric",
                     "master_seed", "fit_floor", "fit_window_decades", "fit_min_points"});

  hodd::SweepSpec spec;
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::current_path();
  for (const auto& source : cfg.get_list("sequences")) {
    spec.sequences.push_back(resolve_sequence(source, base, &run.manifest.inputs).named);
  }
  spec.couplings = cfg.get_doubles("J");
  spec.times = time_grid(cfg.get_double("T_min"), cfg.get_double("T_max"), static_cast<int>(cfg.get_int("T_points")));
  spec.model_seeds = cfg.has("seeds") ? cfg.get_seeds("seeds") : std::vector<std::uint64_t>{1};
  spec.state_samples = static_cast<std::size_t>(cfg.get_int("states", 100));
  spec.metric = hodd::parse_metric(cfg.get_string("metric", "operator_norm"));
  const auto master = cfg.get_int("master_seed", 0);
  if (master < 0) throw ConfigError("master_seed must be non-negative");
  spec.master_seed = static_cast<std::uint64_t>(master);
  spec.jobs = o.jobs;
  run.manifest.master_seed = spec.master_seed;

  hodd::SlopeFitOptions fit;
  fit.floor = cfg.get_double("fit_floor", fit.floor);
  fit.window_decades = cfg.get_double("fit_window_decades", fit.window_decades);
  fit.min_points = static_cast<std::size_t>(cfg.get_int("fit_min_points", static_cast<std::int64_t>(fit.min_points)));

  const auto result = hodd::scaling_sweep(spec, fit);
  std::size_t failed = 0;
  for (const auto& r : result.records) failed += r.failure.empty() ? 0 : 1;

  run.out << "  sequence            J          small-T slope    large-T slope    crossover\n";
  for (const auto& c : result.curves) {
    char line[256];
    if (c.fit) {
      std::snprintf(line, sizeof line, "  %-18s  %.1e  %5.2f +- %.2f    %5.2f +- %.2f    %s\n", c.sequence_id.c_str(),
                    c.coupling, c.fit->small_t.slope, c.fit->small_t.slope_stderr, c.fit->large_t.slope,
                    c.fit->large_t.slope_stderr, c.fit->crossover ? sci(*c.fit->crossover).c_str() : "absent");
    } else {
      std::snprintf(line, sizeof line, "  %-18s  %.1e  no fit: %s\n", c.sequence_id.c_str(), c.coupling,
                    c.fit_note.c_str());
    }
    run.out << line;
  }
  const std::string stem = "sweep_seed" + std::to_string(spec.master_seed);
  run.write(stem + ".csv", hodd::sweep_csv(result.records));
  run.write(stem + ".json", hodd::sweep_summary_json(result));
  if (failed > 0) run.err << failed << " of " << result.records.size() << " points failed; see the CSV\n";
  return failed == result.records.size() ? kExitNumerical : kExitSuccess;
}

// ---------------------------------------------------------------- compare

struct CompareOptions {
  int ours = 5;
  int qdd = 3;
  std::string ours_sequence;
  std::string theirs_sequence;
  std::vector<double> couplings{1e-5, 1e-4};
  std::size_t states = 100;
  std::vector<std::uint64_t> seeds{1};
  double t_min = 1e-3;
  double t_max = 1.0;
  int t_points = 31;
  double window_min = 0.0;
  double window_max = 0.0;
  std::uint64_t master_seed = 0;
  int jobs = 1;
};

int cmd_compare(Run& run, const CompareOptions& o) {
  run.manifest.config = {{"ours", o.ours},       {"qdd", o.qdd},           {"ours_sequence", o.ours_sequence},
                         {"theirs_sequence", o.theirs_sequence},          {"J", o.couplings},
                         {"states", o.states},   {"seeds", o.seeds},       {"T_min", o.t_min},
                         {"T_max", o.t_max},     {"T_points", o.t_points}, {"window_min", o.window_min},
                         {"window_max", o.window_max}, {"master_seed", o.master_seed}, {"jobs", o.jobs}};
  run.manifest.master_seed = o.master_seed;
  if (o.states == 0) throw ConfigError("--states must be positive");
  const auto ours = resolve_sequence(o.ours_sequence.empty() ? "generated:" + std::to_string(o.ours) : o.ours_sequence,
                                     fs::current_path(), &run.manifest.inputs);
  const auto theirs = resolve_sequence(
      o.theirs_sequence.empty() ? "qdd:" + std::to_string(o.qdd) : o.theirs_sequence, fs::current_path(),
      &run.manifest.inputs);

  const hodd::ComparisonSpec spec{ours.named, theirs.named, o.couplings, time_grid(o.t_min, o.t_max, o.t_points),
                                  o.seeds,     o.states,     o.master_seed, o.jobs};
  const auto result = hodd::compare_sequences(spec);

  const double w_hi = o.window_max > 0.0 ? o.window_max : o.t_max;
  const double w_lo = o.window_min > 0.0 ? o.window_min : w_hi / 10.0;
  run.out << result.ours_id << ": " << result.ours_pulses << " pulses (" << result.ours_interior_pulses
          << " interior); " << result.theirs_id << ": " << result.theirs_pulses << " pulses ("
          << result.theirs_interior_pulses << " interior)\n";
  json window = json::array();
  for (double J : spec.couplings) {
    const auto all = hodd::summarize(result, J, spec.times.front(), spec.times.back());
    const auto win = hodd::summarize(result, J, w_lo, w_hi);
    char line[256];
    std::snprintf(line, sizeof line, "  J = %.1e  ours lower on %zu/%zu points overall, %zu/%zu in [%.3g, %.3g]\n", J,
                  all.wins, all.points, win.wins, win.points, w_lo, w_hi);
    run.out << line;
    window.push_back({{"J", J}, {"t_lo", w_lo}, {"t_hi", w_hi}, {"points", win.points}, {"wins", win.wins},
                      {"win_fraction", win.win_fraction()}});
  }
  auto summary = json::parse(hodd::comparison_summary_json(result));
  summary["window"] = window;
  const std::string stem = "compare_seed" + std::to_string(o.master_seed);
  run.write(stem + ".csv", hodd::comparison_csv(result));
  run.write(stem + ".json", summary.dump(2) + "\n");
  return kExitSuccess;
}

// ---------------------------------------------------------------- certify

struct CertifyOptions {
  int order = 2;
  std::vector<double> flips;
  int last_sign = 1;
  int grid = 0;
  int random = 0;
  std::uint64_t seed = 0;
  double threshold = 1e-3;
  int jobs = 1;
};

int cmd_certify(Run& run, const CertifyOptions& o) {
  run.manifest.config = {{"K", o.order},     {"flips", o.flips}, {"last_sign", o.last_sign}, {"grid", o.grid},
                         {"random", o.random}, {"seed", o.seed}, {"threshold", o.threshold}, {"jobs", o.jobs}};
  run.manifest.master_seed = o.seed;
  if (o.order < 1) throw ConfigError("--K must be >= 1");
  if (o.random < 0 || o.grid < 0) throw ConfigError("--random and --grid must be non-negative");
  json report = {{"K", o.order}};
  int code = kExitSuccess;

  if (!o.flips.empty() || (o.random == 0 && o.grid == 0)) {
    const auto cert = hodd::certify_lower_bound(o.flips, o.order, o.last_sign);
    run.out << "certificate value " << g17(cert.value) << " (r = " << cert.flips.size() << ", K = " << o.order
            << ")\n  P' coefficients:";
    for (double c : cert.derivative_coefficients) run.out << ' ' << sci(c);
    run.out << "\n  moments:";
    for (double m : cert.moments) run.out << ' ' << sci(m);
    run.out << "\n  max_m |M_m| >= " << sci(cert.moment_bound) << '\n';
    report["certificate"] = {{"flips", cert.flips},
                             {"last_sign", cert.last_sign},
                             {"value", cert.value},
                             {"derivative_coefficients", cert.derivative_coefficients},
                             {"moments", cert.moments},
                             {"moment_bound", cert.moment_bound}};
    if (std::abs(cert.value - 1.0) > 1e-12) code = kExitVerificationFailed;
  }

  if (o.random > 0) {
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    double worst = 0.0;
    int failures = 0;
    for (int i = 0; i < o.random; ++i) {
      const int k = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(o.order));
      const int r = static_cast<int>(rng() % static_cast<std::uint64_t>(k));
      std::vector<double> flips;
      while (static_cast<int>(flips.size()) < r) {
        const double f = uniform(rng);
        if (f > 0.0 && std::find(flips.begin(), flips.end(), f) == flips.end()) flips.push_back(f);
      }
      std::sort(flips.begin(), flips.end());
      const int sign = (rng() & 1) ? 1 : -1;
      const auto cert = hodd::certify_lower_bound(flips, k, sign);
      const double dev = std::abs(cert.value - 1.0);
      worst = std::max(worst, dev);
      if (dev > 1e-12) ++failures;
    }
    run.out << o.random << " random configurations with r < K <= " << o.order << ": max |value - 1| = " << sci(worst)
            << ", " << failures << " outside 1e-12\n";
    report["random"] = {{"count", o.random}, {"max_deviation", worst}, {"failures", failures}};
    if (failures > 0) code = kExitVerificationFailed;
  }

  if (o.grid > 0) {
    const auto g = hodd::grid_search_lower_bound(o.order, o.grid, o.jobs);
    run.out << "grid search (" << g.placements << " placements of " << o.order - 1 << " flips on 1/" << o.grid
            << "): min max_m |M_m| = " << sci(g.min_max_moment) << " at";
    for (double f : g.argmin) run.out << ' ' << f;
    run.out << (g.min_max_moment >= o.threshold ? " (above " : " (BELOW ") << sci(o.threshold) << ")\n";
    report["grid"] = {{"grid", o.grid},
                      {"placements", g.placements},
                      {"min_max_moment", g.min_max_moment},
                      {"argmin", g.argmin},
                      {"threshold", o.threshold}};
    if (g.min_max_moment < o.threshold) code = kExitVerificationFailed;
  }
  run.write("certify_K" + std::to_string(o.order) + ".json", report.dump(2) + "\n");
  return code;
}

// ---------------------------------------------------------------- jitter

struct JitterCliOptions {
  std::string sequence;
  int order = 2;
  std::vector<int> digits{3, 4, 5, 6};
  double coupling = 1e-6;
  std::uint64_t seed = 1;
  double t_min = 1e-4;
  double t_max = 2.0;
  int t_points = 121;
  std::string target = "intervals";
  double ratio = 2.0;
  int jobs = 1;
};

int cmd_jitter(Run& run, const JitterCliOptions& o) {
  run.manifest.config = {{"sequence", o.sequence}, {"K", o.order},      {"digits", o.digits},
                         {"J", o.coupling},        {"seed", o.seed},    {"T_min", o.t_min},
                         {"T_max", o.t_max},       {"T_points", o.t_points}, {"target", o.target},
                         {"ratio", o.ratio},       {"jobs", o.jobs}};
  run.manifest.master_seed = o.seed;
  if (o.digits.empty()) throw ConfigError("--digits needs at least one value");
  for (int d : o.digits) {
    if (d < 1) throw ConfigError("--digits values must be >= 1");
  }
  const auto seq = resolve_sequence(o.sequence.empty() ? "table-s1:" + std::to_string(o.order) : o.sequence,
                                    fs::current_path(), &run.manifest.inputs);
  hodd::JitterOptions jo;
  if (o.target == "intervals") jo.target = hodd::TruncationTarget::intervals;
  else if (o.target == "cut_times") jo.target = hodd::TruncationTarget::cut_times;
  else throw ConfigError("--target must be 'intervals' or 'cut_times'");
  jo.ratio = o.ratio;
  jo.jobs = o.jobs;
  if (seq.nominal_intervals) jo.nominal_intervals = *seq.nominal_intervals;
  const auto model = hodd::sample_model(o.seed, o.coupling);
  const auto times = time_grid(o.t_min, o.t_max, o.t_points);

  std::string csv = "sequence_id,K,J,T,seed,metric,value\n";
  json studies = json::array();
  std::vector<std::pair<int, std::optional<double>>> found;
  bool full_written = false;
  for (int d : o.digits) {
    const auto study = hodd::jitter_study(seq.named.schedule, d, model, times, jo);
    for (std::size_t i = 0; i < times.size(); ++i) {
      const std::string prefix = seq.named.id + ',' + std::to_string(seq.named.order) + ',' + g17(o.coupling) + ',' +
                                 g17(times[i]) + ',' + std::to_string(o.seed) + ',';
      if (!full_written) csv += prefix + "operator_norm_full," + g17(study.full[i]) + '\n';
      csv += prefix + "operator_norm_d" + std::to_string(d) + ',' + g17(study.truncated[i]) + '\n';
    }
    full_written = true;
    found.emplace_back(d, study.divergence_time);
    run.out << "  d = " << d << ": T_c = "
            << (study.divergence_time ? sci(*study.divergence_time)
                                      : std::string(study.diverged_everywhere ? "below every grid point" : "none in range"))
            << '\n';
    studies.push_back({{"digits", d},
                       {"divergence_time", study.divergence_time ? json(*study.divergence_time) : json(nullptr)},
                       {"diverged_everywhere", study.diverged_everywhere},
                       {"truncated_cut_times", study.truncated_cut_times}});
  }
  json ratios = json::array();
  const int k = seq.named.order;
  for (const auto& [d, tc] : found) {
    for (const auto& [d2, tc2] : found) {
      if (k > 0 && d2 == d + k && tc && tc2) {
        run.out << "  T_c(d = " << d2 << ") / T_c(d = " << d << ") = " << sci(*tc2 / *tc) << '\n';
        ratios.push_back({{"from", d}, {"to", d2}, {"ratio", *tc2 / *tc}});
      }
    }
  }
  const std::string stem = "jitter_seed" + std::to_string(o.seed);
  run.write(stem + ".csv", csv);
  run.write(stem + ".json", json{{"sequence_id", seq.named.id},
                                 {"K", k},
                                 {"J", o.coupling},
                                 {"target", o.target},
                                 {"studies", studies},
                                 {"ratios", ratios}}
                                    .dump(2) +
                                "\n");
  return kExitSuccess;
}

// ---------------------------------------------------------------- table-s1

int cmd_table(Run& run, int order) {
  run.manifest.config = {{"K", order}};
  run.out << hodd::published_table_text();
  run.write("table_s1.txt", std::string(hodd::published_table_text()));
  if (order != 0) {
    if (order < 1 || order > hodd::kPublishedMaxOrder) throw ConfigError("--K must lie in [1, 8]");
    run.write("schedule_table_s1_K" + std::to_string(order) + ".json",
              hodd::schedule_to_json(hodd::published_schedule(order)));
  }
  return kExitSuccess;
}

fs::path default_out_dir(const std::string& command) {
  const char* root = std::getenv(kOutputRootEnv);
  return fs::path(root && *root ? root : "ddtool-runs") / command;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pulse-sequence generation and decoupling-error analysis", "ddtool"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hodd::kVersion));

  std::string out_dir;
  int jobs = 1;
  const auto common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "Output directory (default: $" + std::string(kOutputRootEnv) + "/<command>)");
    sub->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  };

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Optimize (or load) timings for order K");
  generate->add_option("K", gen.order, "Target order")->required()->check(CLI::Range(1, 64));
  generate->add_option("--pattern", gen.pattern, "Pulse axes applied cyclically");
  generate->add_option("--restarts", gen.restarts, "Number of starts")->check(CLI::Range(1, 100000));
  generate->add_option("--seed", gen.seed, "Seed for starts after the first");
  generate->add_option("--max-evals", gen.max_evaluations, "Residual evaluations per start")->check(CLI::PositiveNumber);
  generate->add_option("--jacobian", gen.jacobian, "analytic or forward")->check(CLI::IsMember({"analytic", "forward"}));
  generate->add_flag("--table-s1", gen.table, "Emit the published timings instead of optimizing");
  generate->add_option("--output", gen.output, "File name inside the output directory");
  common(generate);

  VerifyOptions ver;
  auto* verify = app.add_subcommand("verify", "Check that a schedule's moments vanish through order K");
  verify->add_option("schedule", ver.path, "Schedule JSON")->required();
  verify->add_option("--K", ver.order, "Order to check (default: the schedule's declared K)")->check(CLI::Range(1, 64));
  verify->add_option("--tol", ver.tolerance, "Largest accepted |M|");
  verify->add_option("--axes", ver.axes, "Comma-separated noise axes (default: all weight-one Paulis)");
  common(verify);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Evolve one schedule against a sampled qubit-bath model");
  simulate->add_option("--schedule", sim.schedule_file, "Schedule JSON");
  simulate->add_option("--sequence", sim.sequence, "Sequence source, e.g. table-s1:3 or qdd:2");
  simulate->add_option("--J", sim.coupling, "Coupling strength")->check(CLI::NonNegativeNumber);
  simulate->add_option("--T", sim.times, "Total times")->required()->delimiter(',');
  simulate->add_option("--seed", sim.seed, "Model seed");
  simulate->add_option("--states", sim.states, "Haar product states for the trace distance");
  simulate->add_option("--master-seed", sim.master_seed, "Seed for the initial states");
  simulate->add_flag("--magnus", sim.magnus, "Also report the first Magnus term");
  common(simulate);

  SweepOptions swp;
  auto* sweep = app.add_subcommand("sweep", "Run a declarative error-scaling sweep");
  sweep->add_option("config", swp.config, "Sweep config (format = hodd-sweep/1)")->required();
  common(sweep);

  CompareOptions cmp;
  auto* compare = app.add_subcommand("compare", "Compare an optimized sequence with QDD");
  compare->add_option("--ours", cmp.ours, "Order of the optimized sequence")->check(CLI::Range(1, 64));
  compare->add_option("--qdd", cmp.qdd, "QDD order")->check(CLI::Range(1, 64));
  compare->add_option("--ours-sequence", cmp.ours_sequence, "Override the first sequence source");
  compare->add_option("--theirs-sequence", cmp.theirs_sequence, "Override the second sequence source");
  compare->add_option("--J", cmp.couplings, "Coupling strengths")->delimiter(',');
  compare->add_option("--states", cmp.states, "Haar product states per point");
  compare->add_option("--seeds", cmp.seeds, "Model seeds")->delimiter(',');
  compare->add_option("--T-min", cmp.t_min, "Smallest T");
  compare->add_option("--T-max", cmp.t_max, "Largest T");
  compare->add_option("--T-points", cmp.t_points, "Log-spaced T points");
  compare->add_option("--window-min", cmp.window_min, "Summary window start (default T-max/10)");
  compare->add_option("--window-max", cmp.window_max, "Summary window end (default T-max)");
  compare->add_option("--master-seed", cmp.master_seed, "Seed for the initial states");
  common(compare);

  CertifyOptions cert;
  auto* certify = app.add_subcommand("certify", "Lower-bound certificate for switching functions with few flips");
  certify->add_option("--K", cert.order, "Order")->required()->check(CLI::Range(1, 64));
  certify->add_option("--flips", cert.flips, "Flip positions in (0, 1)")->delimiter(',');
  certify->add_option("--last-sign", cert.last_sign, "Sign of the last segment")->check(CLI::IsMember({-1, 1}));
  certify->add_option("--grid", cert.grid, "Exhaustive search over K-1 flips on this grid");
  certify->add_option("--random", cert.random, "Random configurations with r < K' <= K");
  certify->add_option("--seed", cert.seed, "Seed for --random");
  certify->add_option("--threshold", cert.threshold, "Grid minimum must stay at or above this");
  common(certify);

  JitterCliOptions jit;
  auto* jitter = app.add_subcommand("jitter", "Digit-truncation study of a schedule");
  jitter->add_option("--K", jit.order, "Published order to truncate")->check(CLI::Range(1, hodd::kPublishedMaxOrder));
  jitter->add_option("--sequence", jit.sequence, "Sequence source instead of the published table");
  jitter->add_option("--digits", jit.digits, "Kept decimal digits")->delimiter(',');
  jitter->add_option("--J", jit.coupling, "Coupling strength")->check(CLI::NonNegativeNumber);
  jitter->add_option("--seed", jit.seed, "Model seed");
  jitter->add_option("--T-min", jit.t_min, "Smallest T");
  jitter->add_option("--T-max", jit.t_max, "Largest T");
  jitter->add_option("--T-points", jit.t_points, "Log-spaced T points");
  jitter->add_option("--target", jit.target, "intervals or cut_times")->check(CLI::IsMember({"intervals", "cut_times"}));
  jitter->add_option("--ratio", jit.ratio, "Deviation factor that marks divergence");
  common(jitter);

  int table_order = 0;
  auto* table = app.add_subcommand("table-s1", "Print the embedded published timings");
  table->add_option("--K", table_order, "Also write this order as schedule JSON");
  common(table);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitSuccess : kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  Run run{out_dir.empty() ? default_out_dir(name) : fs::path(out_dir), {}, out, err};
  run.manifest.command_line.push_back("ddtool");
  run.manifest.command_line.insert(run.manifest.command_line.end(), args.begin(), args.end());
  run.manifest.version = hodd::kVersion;

  const auto start = std::chrono::steady_clock::now();
  int code = kExitSuccess;
  try {
    if (name == "generate") gen.jobs = jobs, code = cmd_generate(run, gen);
    else if (name == "verify") code = cmd_verify(run, ver);
    else if (name == "simulate") code = cmd_simulate(run, sim);
    else if (name == "sweep") swp.jobs = jobs, code = cmd_sweep(run, swp);
    else if (name == "compare") cmp.jobs = jobs, code = cmd_compare(run, cmp);
    else if (name == "certify") cert.jobs = jobs, code = cmd_certify(run, cert);
    else if (name == "jitter") jit.jobs = jobs, code = cmd_jitter(run, jit);
    else code = cmd_table(run, table_order);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    code = kExitUsage;
  } catch (const hodd::ScheduleFormatError& e) {
    err << "schedule error: " << e.what() << '\n';
    code = kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    code = kExitUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    code = kExitNumerical;
  }
  run.manifest.exit_code = code;
  run.manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    append_manifest(run.out_dir, run.manifest);
  } catch (const std::exception& e) {
    err << "cannot record manifest: " << e.what() << '\n';
    if (code == kExitSuccess) code = kExitUsage;
  }
  return code;
}

}  // namespace ddtool
