// wfexact: command-line front end for the exact Wright-Fisher samplers.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wfexact/bridge.hpp"
#include "wfexact/exact_rejection.hpp"
#include "wfexact/io.hpp"
#include "wfexact/neutral.hpp"
#include "wfexact/validation.hpp"

using namespace wfexact;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string subcommand;
  double theta1 = 0.5;
  double theta2 = 0.5;
  double sigma = 0.0;
  double h = 0.5;
  double x = 0.5;
  double z = 0.5;  // bridge endpoint: --z for points, --y for paths
  double s = 0.25;
  double t = 0.5;
  std::int64_t n = 1000;
  std::int64_t paths = 1;
  std::uint64_t seed = 1;
  double t_min = 0.05;
  std::string eps = "auto";
  std::string mode = "auto";
  std::string output;
  std::string format;
  std::string preset;
  std::string method = "exact";
  double delta = 1e-3;
  double segment = 0.0;
  std::vector<double> weights;
  std::vector<double> mu;
};

constexpr std::size_t kBlock = 256;

unsigned thread_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("WF_EXACT_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    } catch (const std::exception&) {
      throw UsageError("WF_EXACT_THREADS must be a positive integer");
    }
  }
  return n;
}

/// Runs body(block, worker) for every block; block b always sees the same
/// substream, so results do not depend on the thread count.
void parallel_blocks(std::size_t blocks, const std::function<void(std::size_t, unsigned)>& body) {
  const unsigned workers = std::min<std::size_t>(thread_count(), std::max<std::size_t>(blocks, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&](unsigned w) {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= blocks) return;
      try {
        body(b, w);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = blocks;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run, w);
  run(0);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

ApproxPolicy policy_of(const RunConfig& c) {
  ApproxPolicy p;
  p.t_min = c.t_min;
  if (c.mode == "exact") p.mode = ApproxPolicy::Mode::exact_only;
  else if (c.mode == "approx") p.mode = ApproxPolicy::Mode::approx_only;
  else p.mode = ApproxPolicy::Mode::automatic;
  return p;
}

BridgeOptions bridge_options_of(const RunConfig& c) {
  BridgeOptions o;
  o.policy = policy_of(c);
  if (c.eps != "auto") {
    try {
      o.eps = std::stod(c.eps);
    } catch (const std::exception&) {
      throw UsageError("--eps must be a number in (0,1) or 'auto'");
    }
  }
  return o;
}

DriftSpec drift_of(const RunConfig& c) {
  return DriftSpec::diploid(MutationParams(c.theta1, c.theta2), c.sigma, c.h);
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw UsageError("cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

struct Totals {
  SampleStats stats;
  std::uint64_t rng_draws = 0;
  std::mutex mutex;
  void add(const SampleStats& s, std::uint64_t draws) {
    std::lock_guard lock(mutex);
    stats += s;
    rng_draws += draws;
  }
};

void report_draws(std::size_t n, const Totals& totals, double seconds) {
  const double d = static_cast<double>(std::max<std::size_t>(n, 1));
  std::cerr << "draws=" << n << " coefficients=" << format_real(static_cast<double>(totals.stats.coefficients) / d)
            << " rng_draws=" << format_real(static_cast<double>(totals.rng_draws) / d)
            << " approx_fallbacks=" << format_real(static_cast<double>(totals.stats.approx_fallbacks) / d)
            << " wall_time_s=" << format_real(seconds) << '\n';
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// n scalar draws, each block from its own substream; draw(rng, stats, worker)
/// produces one value.
template <class MakeWorker>
std::vector<double> draw_scalars(const RunConfig& c, MakeWorker make_worker, Totals& totals) {
  const auto n = static_cast<std::size_t>(c.n);
  std::vector<double> out(n);
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  const unsigned workers = thread_count();
  using Worker = decltype(make_worker());
  std::vector<std::optional<Worker>> per_thread(workers);
  const Rng root(c.seed);
  parallel_blocks(blocks, [&](std::size_t b, unsigned w) {
    if (!per_thread[w]) per_thread[w].emplace(make_worker());
    Rng rng = root.substream(b);
    SampleStats stats;
    for (std::size_t i = b * kBlock; i < std::min(n, (b + 1) * kBlock); ++i) out[i] = (*per_thread[w])(rng, stats);
    totals.add(stats, rng.draws());
  });
  return out;
}

void write_scalars(const RunConfig& c, const std::vector<double>& values) {
  Output out(c.output);
  if (c.format == "jsonl") {
    for (std::size_t i = 0; i < values.size(); ++i)
      out.stream() << nlohmann::json{{"schema_version", kSchemaVersion}, {"index", i}, {"value", values[i]}}.dump()
                   << '\n';
    return;
  }
  CsvWriter csv(out.stream(), {"index", "value"});
  for (std::size_t i = 0; i < values.size(); ++i) csv.row({std::to_string(i), format_real(values[i])});
}

int cmd_sample_ancestral(const RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  const MutationParams params(c.theta1, c.theta2);
  require_time(c.t);
  const ApproxPolicy policy = policy_of(c);
  Totals totals;
  const auto values = draw_scalars(
      c,
      [&] {
        return [s = LineageSampler(params, c.t, policy)](Rng& rng, SampleStats& st) mutable {
          return static_cast<double>(s.sample(rng, &st).count);
        };
      },
      totals);
  write_scalars(c, values);
  report_draws(values.size(), totals, seconds_since(start));
  return 0;
}

int cmd_sample_transition(const RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  const MutationParams params(c.theta1, c.theta2);
  require_frequency(c.x);
  require_time(c.t);
  const ApproxPolicy policy = policy_of(c);
  Totals totals;
  const auto values = draw_scalars(
      c,
      [&] {
        return [s = TransitionSampler(params, c.t, policy), x = c.x](Rng& rng, SampleStats& st) mutable {
          return s.sample(x, rng, &st);
        };
      },
      totals);
  write_scalars(c, values);
  report_draws(values.size(), totals, seconds_since(start));
  return 0;
}

int cmd_sample_bridge_point(const RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  const MutationParams params(c.theta1, c.theta2);
  const BridgeOptions options = bridge_options_of(c);
  // construct once up front so argument errors surface before any work
  BridgeSampler probe(params, c.x, c.z, c.s, c.t, options);
  Totals totals;
  const auto values = draw_scalars(
      c,
      [&] {
        return [s = BridgeSampler(params, c.x, c.z, c.s, c.t, options)](Rng& rng, SampleStats& st) mutable {
          return s.sample(rng, &st).value;
        };
      },
      totals);
  write_scalars(c, values);
  report_draws(values.size(), totals, seconds_since(start));
  return 0;
}

int cmd_sample_multiallele(const RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  if (c.weights.empty() || c.mu.empty()) throw UsageError("sample-multiallele needs --weights and --mu");
  const MultiAlleleMutation mutation(c.weights);
  const SimplexPoint mu(c.mu);
  require_time(c.t);
  const ApproxPolicy policy = policy_of(c);
  const auto n = static_cast<std::size_t>(c.n);
  std::vector<SimplexPoint> draws(n, mu);
  const Rng root(c.seed);
  Totals totals;
  parallel_blocks((n + kBlock - 1) / kBlock, [&](std::size_t b, unsigned) {
    Rng rng = root.substream(b);
    SampleStats stats;
    for (std::size_t i = b * kBlock; i < std::min(n, (b + 1) * kBlock); ++i)
      draws[i] = sample_transition_multiallele(mutation, mu, c.t, policy, rng, &stats);
    totals.add(stats, rng.draws());
  });
  Output out(c.output);
  if (c.format == "jsonl") {
    for (std::size_t i = 0; i < n; ++i) {
      const auto w = draws[i].weights();
      out.stream() << nlohmann::json{{"schema_version", kSchemaVersion},
                                     {"index", i},
                                     {"value", std::vector<double>(w.begin(), w.end())}}
                          .dump()
                   << '\n';
    }
  } else {
    CsvWriter csv(out.stream(), {"index", "type", "value"});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < draws[i].size(); ++k)
        csv.row({std::to_string(i), std::to_string(k), format_real(draws[i][k])});
  }
  report_draws(n, totals, seconds_since(start));
  return 0;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::vector<SkeletonPath> draw_paths(const RunConfig& c, bool bridge) {
  const DriftSpec drift = drift_of(c);
  RejectionOptions options;
  options.policy = policy_of(c);
  options.bridge = bridge_options_of(c);
  if (bridge) {
    require_interior(c.x, "x");
    require_interior(c.z, "y");
  } else {
    require_frequency(c.x);
  }
  require_time(c.t, "T");
  const auto n = static_cast<std::size_t>(c.paths);
  std::vector<SkeletonPath> paths(n);
  const Rng root(c.seed);
  parallel_blocks(n, [&](std::size_t i, unsigned) {
    Rng rng = root.substream(i);
    if (bridge) paths[i] = sample_bridge_path_exact(c.x, c.z, c.t, drift, rng, options);
    else if (c.segment > 0.0) paths[i] = sample_path_segmented(c.x, c.t, drift, rng, c.segment, options);
    else paths[i] = sample_path_exact(c.x, c.t, drift, rng, options);
  });
  return paths;
}

PathDiagnostics total_of(const std::vector<SkeletonPath>& paths) {
  PathDiagnostics total;
  for (const auto& p : paths) total += p.diagnostics;
  return total;
}

double median_ms(const std::vector<SkeletonPath>& paths) {
  std::vector<double> ms;
  for (const auto& p : paths) ms.push_back(1e3 * p.diagnostics.wall_time);
  return median(ms);
}

int cmd_sample_path(const RunConfig& c, bool bridge) {
  const auto paths = draw_paths(c, bridge);
  const PathDiagnostics total = total_of(paths);
  Output out(c.output);
  if (c.format == "csv") {
    CsvWriter csv(out.stream(), {"path", "t", "x", "approximate"});
    for (std::size_t i = 0; i < paths.size(); ++i)
      for (const Knot& k : paths[i].knots)
        csv.row({std::to_string(i), format_real(k.time), format_real(k.value), k.approximate ? "1" : "0"});
  } else {
    for (std::size_t i = 0; i < paths.size(); ++i) write_path_jsonl(out.stream(), paths[i], i);
    write_diagnostics_jsonl(out.stream(), total, paths.size());
  }
  std::cerr << diagnostics_summary(total, paths.size()) << " median_ms=" << format_real(median_ms(paths)) << '\n';
  return 0;
}

int cmd_validate(const RunConfig& c) {
  if (c.theta1 != 0.5 || c.theta2 != 0.5)
    throw UsageError("validate compares against the reflected Brownian motion law, which needs theta1 = theta2 = 0.5");
  if (c.sigma != 0.0) throw UsageError("validate runs the neutral model; drop --sigma");
  require_frequency(c.x);
  require_time(c.t);
  if (c.n < 100) throw UsageError("validate needs --n >= 100");
  const MutationParams params(c.theta1, c.theta2);
  std::vector<double> ys;
  const auto start = std::chrono::steady_clock::now();
  Totals totals;
  if (c.method == "euler") {
    if (!(c.delta > 0.0)) throw UsageError("--delta must be > 0");
    const DriftSpec drift = DriftSpec::neutral(params);
    ys = draw_scalars(
        c, [&] { return [&](Rng& rng, SampleStats&) { return euler_baseline(c.x, c.t, drift, c.delta, rng); }; },
        totals);
  } else {
    const ApproxPolicy policy = policy_of(c);
    ys = draw_scalars(
        c,
        [&] {
          return [s = TransitionSampler(params, c.t, policy), x = c.x](Rng& rng, SampleStats& st) mutable {
            return s.sample(x, rng, &st);
          };
        },
        totals);
  }
  std::sort(ys.begin(), ys.end());
  const ValidationReport r = ks_validate(ys, [&](double y) { return reflected_wf_cdf(c.x, y, c.t); });
  nlohmann::json rec = {{"schema_version", kSchemaVersion},
                        {"ks", r.ks_statistic},
                        {"p", r.p_value},
                        {"n", r.n},
                        {"reference", to_string(r.reference)},
                        {"method", c.method},
                        {"x", c.x},
                        {"t", c.t}};
  if (c.method == "euler") {
    rec["approximate"] = true;
    rec["delta"] = c.delta;
  }
  Output out(c.output);
  out.stream() << rec.dump() << '\n';
  report_draws(ys.size(), totals, seconds_since(start));
  return 0;
}

int cmd_bench(const RunConfig& c) {
  const auto paths = draw_paths(c, false);
  const PathDiagnostics total = total_of(paths);
  const double n = static_cast<double>(std::max<std::size_t>(paths.size(), 1));
  Output out(c.output);
  const std::vector<std::string> header{"t",           "x",        "sigma",        "paths",
                                        "attempts",    "poisson_points", "coefficients", "rng_draws",
                                        "approx_fallbacks", "median_ms"};
  const std::vector<std::string> row{format_real(c.t),
                                     format_real(c.x),
                                     format_real(c.sigma),
                                     std::to_string(paths.size()),
                                     format_real(static_cast<double>(total.attempts) / n),
                                     format_real(static_cast<double>(total.poisson_points) / n),
                                     format_real(static_cast<double>(total.coefficients) / n),
                                     format_real(static_cast<double>(total.rng_draws) / n),
                                     format_real(static_cast<double>(total.approx_fallbacks) / n),
                                     format_real(median_ms(paths))};
  if (c.format == "jsonl") {
    nlohmann::json rec = {{"schema_version", kSchemaVersion}, {"record", "bench"}};
    for (std::size_t i = 0; i < header.size(); ++i) rec[header[i]] = std::stod(row[i]);
    out.stream() << rec.dump() << '\n';
  } else {
    CsvWriter csv(out.stream(), header);
    csv.row(row);
  }
  std::cerr << diagnostics_summary(total, paths.size()) << " median_ms=" << format_real(median_ms(paths)) << '\n';
  return 0;
}

void error_line(const char* kind, const std::string& message) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
}

// flags each subcommand accepts (besides --config, --preset, --output, --format, --seed)
const std::map<std::string, std::set<std::string>> kAllowed = {
    {"sample-ancestral", {"theta1", "theta2", "t", "n", "t-min", "mode"}},
    {"sample-transition", {"theta1", "theta2", "x", "t", "n", "t-min", "mode"}},
    {"sample-multiallele", {"weights", "mu", "t", "n", "t-min", "mode"}},
    {"sample-bridge-point", {"theta1", "theta2", "x", "z", "s", "t", "n", "t-min", "mode", "eps"}},
    {"sample-path", {"theta1", "theta2", "sigma", "h", "x", "t", "T", "paths", "t-min", "mode", "eps", "segment"}},
    {"sample-bridge-path", {"theta1", "theta2", "sigma", "h", "x", "y", "t", "T", "paths", "t-min", "mode", "eps"}},
    {"validate", {"theta1", "theta2", "x", "t", "n", "t-min", "mode", "method", "delta", "sigma"}},
    {"bench", {"theta1", "theta2", "sigma", "h", "x", "t", "T", "paths", "t-min", "mode", "eps"}},
};

void check_combination(const std::string& sub, const std::vector<std::string>& args) {
  static const std::set<std::string> common{"config", "preset", "output", "format", "seed", "help"};
  const auto& allowed = kAllowed.at(sub);
  for (const std::string& a : args) {
    if (a.rfind("--", 0) != 0) continue;
    const std::string name = a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2);
    if (!common.count(name) && !allowed.count(name)) throw UsageError("--" + name + " does not apply to " + sub);
  }
}

void apply_preset(RunConfig& c, const CLI::App& app) {
  auto unset = [&](const char* name) { return app.get_option(name)->count() == 0; };
  if (c.preset.empty()) return;
  if (c.preset == "table1") {
    if (unset("--theta1")) c.theta1 = 0.5;
    if (unset("--theta2")) c.theta2 = 0.5;
    if (unset("--n")) c.n = 10000;
  } else if (c.preset == "table2") {
    if (unset("--theta1")) c.theta1 = 0.01;
    if (unset("--theta2")) c.theta2 = 0.01;
    if (unset("--sigma")) c.sigma = 1.0;
    if (unset("--h")) c.h = 0.5;
    if (unset("--paths")) c.paths = 1000;
  } else {
    throw UsageError("unknown preset " + c.preset + " (expected table1 or table2)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact simulation of the Wright-Fisher diffusion"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "flat key=value file mirroring the flags");
  RunConfig c;

  app.add_option("--theta1", c.theta1, "mutation rate towards allele 1");
  app.add_option("--theta2", c.theta2, "mutation rate towards allele 2");
  app.add_option("--sigma", c.sigma, "selection coefficient");
  app.add_option("--h", c.h, "dominance (0.5 is genic selection)");
  app.add_option("--x", c.x, "starting frequency");
  auto* z_opt = app.add_option("--z", c.z, "bridge endpoint frequency");
  app.add_option("--y", c.z, "path endpoint frequency")->excludes(z_opt);
  app.add_option("--s", c.s, "bridge sampling time");
  auto* t_opt = app.add_option("--t", c.t, "time horizon");
  app.add_option("--T", c.t, "path length (same as --t)")->excludes(t_opt);
  app.add_option("--n", c.n, "number of draws")->check(CLI::PositiveNumber);
  app.add_option("--paths", c.paths, "number of paths")->check(CLI::PositiveNumber);
  app.add_option("--seed", c.seed, "RNG seed");
  app.add_option("--t-min", c.t_min, "exact lineage sampling below this time falls back to the Gaussian law");
  app.add_option("--eps", c.eps, "bridge decay epsilon, or auto");
  app.add_option("--mode", c.mode, "lineage sampler: exact, approx or auto")
      ->check(CLI::IsMember({"exact", "approx", "auto"}));
  app.add_option("--output", c.output, "output file (default standard output)");
  app.add_option("--format", c.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  app.add_option("--preset", c.preset, "table1 or table2");
  app.add_option("--method", c.method, "validate: exact or euler")->check(CLI::IsMember({"exact", "euler"}));
  app.add_option("--delta", c.delta, "Euler step size");
  app.add_option("--segment", c.segment, "split paths into segments of at most this length (0 = unsplit)");
  app.add_option("--weights", c.weights, "theta * P0, comma separated")->delimiter(',');
  app.add_option("--mu", c.mu, "starting point on the simplex, comma separated")->delimiter(',');

  for (const auto& [name, _] : kAllowed) app.add_subcommand(name, "")->fallthrough();
  app.get_subcommand("sample-ancestral")->description("lineage counts of the coalescent with mutation");
  app.get_subcommand("sample-transition")->description("neutral transition draws");
  app.get_subcommand("sample-multiallele")->description("finite-type neutral transition draws");
  app.get_subcommand("sample-bridge-point")->description("neutral bridge draws at time s");
  app.get_subcommand("sample-path")->description("skeletons of selected paths");
  app.get_subcommand("sample-bridge-path")->description("skeletons of selected bridges");
  app.get_subcommand("validate")->description("K-S test against the reflected Brownian motion law");
  app.get_subcommand("bench")->description("efficiency summary of the rejection sampler");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    error_line("usage", e.what());
    return 2;
  }

  try {
    c.subcommand = app.get_subcommands().front()->get_name();
    check_combination(c.subcommand, std::vector<std::string>(argv + 1, argv + argc));
    apply_preset(c, app);
    const std::string& sub = c.subcommand;
    const bool path_like = sub == "sample-path" || sub == "sample-bridge-path";
    if (c.format.empty()) c.format = path_like ? "jsonl" : "csv";
    if (sub == "sample-ancestral") return cmd_sample_ancestral(c);
    if (sub == "sample-transition") return cmd_sample_transition(c);
    if (sub == "sample-multiallele") return cmd_sample_multiallele(c);
    if (sub == "sample-bridge-point") return cmd_sample_bridge_point(c);
    if (sub == "sample-path") return cmd_sample_path(c, false);
    if (sub == "sample-bridge-path") return cmd_sample_path(c, true);
    if (sub == "validate") return cmd_validate(c);
    return cmd_bench(c);
  } catch (const UsageError& e) {
    error_line("usage", e.what());
    return 2;
  } catch (const InvalidArgument& e) {
    error_line("invalid_argument", e.what());
    return 2;
  } catch (const Error& e) {
    error_line("numeric", e.what());
    return 1;
  } catch (const std::exception& e) {
    error_line("internal", e.what());
    return 1;
  }
}
