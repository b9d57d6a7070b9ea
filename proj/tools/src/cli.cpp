#include <kronsr_cli/cli.hpp>

#include <kronsr/channel_io.hpp>
#include <kronsr/errors.hpp>
#include <kronsr/irs_channel.hpp>
#include <kronsr/records_io.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <sstream>

namespace kronsr::cli {
namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kProvenanceSchema = "kronsr.provenance/1";

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (const auto& x : v) {
    if (!out.empty()) out += ',';
    if constexpr (std::is_same_v<T, std::string>)
      out += x;
    else if constexpr (std::is_floating_point_v<T>)
      out += num(x);
    else
      out += std::to_string(x);
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  throw UsageError("invalid value '" + value + "' for " + key + ": expected " + expected);
}

long long to_int(const std::string& key, const std::string& value, long long min) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &pos);
  } catch (const std::exception&) {
    bad_value(key, value, "an integer");
  }
  if (pos != value.size()) bad_value(key, value, "an integer");
  if (v < min) bad_value(key, value, "an integer >= " + std::to_string(min));
  return v;
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    bad_value(key, value, "a number");
  }
  if (pos != value.size() || !std::isfinite(v)) bad_value(key, value, "a finite number");
  return v;
}

std::vector<Index> to_index_list(const std::string& key, const std::string& value, long long min) {
  std::vector<Index> out;
  for (const auto& item : split_list(value)) out.push_back(static_cast<Index>(to_int(key, item, min)));
  return out;
}

std::string irs_amplitude_name(IrsAmplitude a) {
  return a == IrsAmplitude::InvSqrtN ? "inv_sqrt_n" : "inv_sqrt_l";
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

// Ordered so that the scenario is known before anything depends on it.
const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table{
      {"run.scenario",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         try {
           c.spec.scenario = parse_scenario(v);
         } catch (const InvalidInput&) {
           bad_value(k, v, "synthetic, channel or denoise-table");
         }
       }},
      {"run.algorithms",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.algorithms.clear();
         for (const auto& name : split_list(v)) {
           try {
             c.spec.algorithms.push_back(parse_algorithm(name));
           } catch (const InvalidInput&) {
             bad_value(k, name, "one of cSBL, OMP, AM-KroSBL, SVD-KroSBL, dOMP, dSBL");
           }
         }
       }},
      {"run.trials", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.trials = static_cast<int>(to_int(k, v, 1));
       }},
      {"run.seed", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.base_seed = static_cast<std::uint64_t>(to_int(k, v, 0));
       }},
      {"run.parallel", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.parallel = static_cast<int>(to_int(k, v, 1));
       }},
      {"run.out", [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v.empty()) bad_value(k, v, "a directory path");
         c.out_dir = v;
       }},
      {"run.snr", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.snr.clear();
         for (const auto& item : split_list(v)) c.snr.push_back(to_double(k, item));
       }},
      {"run.m", [](RunConfig& c, const std::string& k, const std::string& v) { c.m = to_index_list(k, v, 1); }},
      {"run.sparsity",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.sparsity = to_index_list(k, v, 1); }},
      {"solver.max_em_iters", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.solver.max_em_iters = static_cast<int>(to_int(k, v, 1));
       }},
      {"solver.em_tol", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.solver.em_tol = to_double(k, v);
       }},
      {"solver.prune_threshold", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.solver.prune_threshold = to_double(k, v);
       }},
      {"solver.noise_floor", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.solver.noise_floor = to_double(k, v);
       }},
      {"solver.support_threshold", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.solver.support_threshold = to_double(k, v);
       }},
      {"solver.am_inner_iters", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.solver.am_inner_iters = static_cast<int>(to_int(k, v, 0));
       }},
      {"synthetic.N", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.synthetic.N = static_cast<Index>(to_int(k, v, 1));
       }},
      {"synthetic.fixed_rows", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.synthetic.fixed_rows = to_index_list(k, v, 1);
       }},
      {"channel.R", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.channel.geometry.R = static_cast<Index>(to_int(k, v, 1));
       }},
      {"channel.T", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.channel.geometry.T = static_cast<Index>(to_int(k, v, 1));
       }},
      {"channel.L", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.channel.geometry.L = static_cast<Index>(to_int(k, v, 1));
       }},
      {"channel.N", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.channel.geometry.N = static_cast<Index>(to_int(k, v, 1));
       }},
      {"channel.P_BS", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.channel.geometry.P_BS = static_cast<Index>(to_int(k, v, 1));
       }},
      {"channel.P_MS", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.channel.geometry.P_MS = static_cast<Index>(to_int(k, v, 1));
       }},
      {"channel.K_I", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.channel.protocol.K_I = static_cast<Index>(to_int(k, v, 1));
       }},
      {"channel.K_P", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.channel.protocol.K_P = static_cast<Index>(to_int(k, v, 1));
       }},
      {"channel.irs_amplitude",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "inv_sqrt_n")
           c.spec.channel.protocol.amplitude = IrsAmplitude::InvSqrtN;
         else if (v == "inv_sqrt_l")
           c.spec.channel.protocol.amplitude = IrsAmplitude::InvSqrtL;
         else
           bad_value(k, v, "inv_sqrt_n or inv_sqrt_l");
       }},
      {"channel.ser_symbols", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.channel.ser_symbols = static_cast<std::uint64_t>(to_int(k, v, 0));
       }},
  };
  return table;
}

// Canonical text of every key, regenerated from the parsed values so that
// formatting differences ("20" vs "20.0") do not change the config hash.
std::map<std::string, std::string> snapshot(const RunConfig& c) {
  std::vector<std::string> algos;
  for (Algorithm a : c.spec.algorithms) algos.push_back(to_string(a));
  const auto& s = c.spec.solver;
  const auto& g = c.spec.channel.geometry;
  const auto& p = c.spec.channel.protocol;
  return {
      {"run.scenario", to_string(c.spec.scenario)},
      {"run.algorithms", join(algos)},
      {"run.trials", std::to_string(c.spec.trials)},
      {"run.seed", std::to_string(c.spec.base_seed)},
      {"run.parallel", std::to_string(c.spec.parallel)},
      {"run.out", c.out_dir.string()},
      {"run.snr", join(c.snr)},
      {"run.m", join(c.m)},
      {"run.sparsity", join(c.sparsity)},
      {"solver.max_em_iters", std::to_string(s.max_em_iters)},
      {"solver.em_tol", num(s.em_tol)},
      {"solver.prune_threshold", num(s.prune_threshold)},
      {"solver.noise_floor", num(s.noise_floor)},
      {"solver.support_threshold", num(s.support_threshold)},
      {"solver.am_inner_iters", std::to_string(s.am_inner_iters)},
      {"synthetic.N", std::to_string(c.spec.synthetic.N)},
      {"synthetic.fixed_rows", join(c.spec.synthetic.fixed_rows)},
      {"channel.R", std::to_string(g.R)},
      {"channel.T", std::to_string(g.T)},
      {"channel.L", std::to_string(g.L)},
      {"channel.N", std::to_string(g.N)},
      {"channel.P_BS", std::to_string(g.P_BS)},
      {"channel.P_MS", std::to_string(g.P_MS)},
      {"channel.K_I", std::to_string(p.K_I)},
      {"channel.K_P", std::to_string(p.K_P)},
      {"channel.irs_amplitude", irs_amplitude_name(p.amplitude)},
      {"channel.ser_symbols", std::to_string(c.spec.channel.ser_symbols)},
  };
}

bool is_known(const std::string& key) {
  for (const auto& [k, _] : setters())
    if (k == key) return true;
  return false;
}

std::map<std::string, std::string> parse_ini(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const CLI::Error& e) {
    throw UsageError("malformed config file " + origin + ": " + e.what());
  }
  std::map<std::string, std::string> out;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    std::string section = "run";
    if (!item.parents.empty()) {
      section.clear();
      for (const auto& p : item.parents) section += (section.empty() ? "" : ".") + p;
    }
    const std::string key = section + "." + item.name;
    if (!is_known(key)) throw UsageError("unknown key '" + key + "' in config file " + origin);
    if (out.count(key)) throw UsageError("duplicate key '" + key + "' in config file " + origin);
    std::string value;
    for (const auto& v : item.inputs) value += (value.empty() ? "" : ",") + v;
    out[key] = value;
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct FlagValues {
  std::optional<std::string> config;
  std::map<std::string, std::string> values;
  std::vector<std::string> sets;
};

// Flags shared by the subcommands; each maps to a config key.
void add_run_flags(CLI::App& app, FlagValues& f) {
  app.add_option_function<std::string>("--config", [&f](const std::string& v) { f.config = v; },
                                       "INI config file");
  const std::vector<std::tuple<std::string, std::string, std::string>> flags{
      {"--scenario", "run.scenario", "synthetic | channel | denoise-table"},
      {"--seed", "run.seed", "base seed; trial t uses seed + t"},
      {"--trials", "run.trials", "trials per grid point"},
      {"--snr", "run.snr", "SNR grid in dB, e.g. 5,10,15"},
      {"--m", "run.m", "measurement levels (rows of H_1)"},
      {"--sparsity", "run.sparsity", "nonzeros per factor"},
      {"--algorithms", "run.algorithms", "comma-separated algorithm names"},
      {"--out", "run.out", "output directory"},
      {"--parallel", "run.parallel", "worker threads"},
  };
  for (const auto& [flag, key, help] : flags)
    app.add_option_function<std::string>(flag, [&f, key = key](const std::string& v) { f.values[key] = v; }, help);
  app.add_option("--set", f.sets, "any config key, as section.key=value (repeatable)");
}

std::map<std::string, std::string> flag_map(const FlagValues& f) {
  std::map<std::string, std::string> out = f.values;
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects section.key=value, got '" + s + "'");
    const std::string key = s.substr(0, eq);
    if (!is_known(key)) throw UsageError("unknown key '" + key + "' in --set");
    out[key] = s.substr(eq + 1);
  }
  return out;
}

RunConfig config_from_flags(const FlagValues& f) {
  const auto flags = flag_map(f);
  if (!f.config) return make_config(std::nullopt, std::nullopt, flags);
  return make_config(read_file(*f.config), std::filesystem::path(*f.config), flags);
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw UsageError("cannot write " + path.string());
}

void print_summary(const std::vector<SummaryRow>& rows, std::ostream& log) {
  char line[256];
  for (const auto& r : rows) {
    if (r.scenario == "denoise-table") {
      std::snprintf(line, sizeof line, "snr %6g dB  before %8.3f dB  after %8.3f dB  (%zu trials)\n",
                    r.point.snr_db, r.denoise_before_db.mean, r.denoise_after_db.mean, r.trials);
    } else if (r.scenario == "channel") {
      std::snprintf(line, sizeof line, "snr %6g dB  %-10s rmse %.4g  ser %.4g  time %.3g s  failed %zu/%zu\n",
                    r.point.snr_db, r.algorithm.c_str(), r.rmse.mean, r.ser.n ? r.ser.mean : NAN,
                    r.median_wall_time_s, r.failed, r.trials);
    } else {
      std::snprintf(line, sizeof line,
                    "snr %6g dB  m %2lld  S %lld  %-10s rmse %.4g  srr %.3f  time %.3g s  failed %zu/%zu\n",
                    r.point.snr_db, static_cast<long long>(r.point.m), static_cast<long long>(r.point.S),
                    r.algorithm.c_str(), r.rmse.mean, r.srr.mean, r.median_wall_time_s, r.failed, r.trials);
    }
    log << line;
  }
}

}  // namespace

std::string RunConfig::config_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& [k, v] : settings) {
    // Neither the output location nor the thread count changes results.
    if (k == "run.out" || k == "run.parallel") continue;
    for (char c : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const std::map<std::string, std::string>& default_settings() {
  static const std::map<std::string, std::string> d = [] {
    RunConfig c;
    c.spec.algorithms = all_algorithms();
    c.snr = {20.0};
    c.m = {12};
    c.sparsity = {3};
    return snapshot(c);
  }();
  return d;
}

RunConfig make_config(const std::optional<std::string>& file_text,
                      const std::optional<std::filesystem::path>& file_path,
                      const std::map<std::string, std::string>& flags) {
  const std::string origin = file_path ? file_path->string() : "<text>";
  const auto file = file_text ? parse_ini(*file_text, origin) : std::map<std::string, std::string>{};
  for (const auto& [k, _] : flags)
    if (!is_known(k)) throw UsageError("unknown key '" + k + "'");

  RunConfig c;
  c.config_file = file_path;
  std::map<std::string, std::string> given = file;
  for (const auto& [k, v] : flags) {
    const auto it = file.find(k);
    if (it != file.end() && it->second != v) c.overrides.push_back({k, it->second, v});
    given[k] = v;
  }
  for (const auto& [key, set] : setters()) {
    const auto it = given.find(key);
    if (it != given.end()) set(c, key, it->second);
  }

  const Scenario sc = c.spec.scenario;
  if (sc == Scenario::Channel) {
    for (const char* k : {"run.m", "run.sparsity"})
      if (given.count(k))
        throw UsageError(std::string("conflicting settings: ") + k +
                         " does not apply to run.scenario 'channel'");
  }
  if (sc == Scenario::DenoiseTable && given.count("run.algorithms"))
    throw UsageError("conflicting settings: run.algorithms does not apply to run.scenario 'denoise-table'");

  if (!given.count("run.algorithms") && sc != Scenario::DenoiseTable) c.spec.algorithms = all_algorithms();
  if (!given.count("run.snr")) {
    if (sc == Scenario::DenoiseTable)
      c.snr = {5, 10, 15, 20, 25, 30};
    else
      c.snr = {20.0};
  }
  if (sc != Scenario::Channel) {
    if (!given.count("run.m")) c.m = {12};
    if (!given.count("run.sparsity")) c.sparsity = {3};
  }

  if (c.snr.empty() || (sc != Scenario::Channel && (c.m.empty() || c.sparsity.empty())))
    throw UsageError("empty sweep grid");
  if (sc != Scenario::DenoiseTable && c.spec.algorithms.empty())
    throw UsageError("empty algorithm list");

  c.spec.grid.clear();
  if (sc == Scenario::Channel) {
    for (double s : c.snr) c.spec.grid.push_back({s, GridPoint{}.m, GridPoint{}.S});
  } else {
    for (double s : c.snr)
      for (Index m : c.m)
        for (Index k : c.sparsity) c.spec.grid.push_back({s, m, k});
  }
  try {
    c.spec.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("invalid configuration: ") + e.what());
  }
  c.settings = snapshot(c);
  return c;
}

RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"kronsr run"};
  FlagValues f;
  add_run_flags(app, f);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  return config_from_flags(f);
}

int run(const RunConfig& cfg, std::ostream& log) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec || !std::filesystem::is_directory(cfg.out_dir))
    throw UsageError("output directory " + cfg.out_dir.string() + " is not writable");

  const std::string hash = cfg.config_hash();
  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();

  SweepSpec spec = cfg.spec;
  spec.progress = [&log](std::size_t done, std::size_t total) {
    log << "[kronsr] " << done << "/" << total << " trials done\n" << std::flush;
  };
  const auto records = run_sweep(spec);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::size_t failed = 0;
  for (const auto& r : records) failed += r.failed;

  std::ostringstream csv;
  write_records_csv(csv, records, hash);
  write_text(cfg.out_dir / "records.csv", csv.str());
  const auto rows = aggregate(records);
  write_text(cfg.out_dir / "summary.json", summary_json(rows, hash) + "\n");

  Json prov;
  prov["schema"] = kProvenanceSchema;
  prov["config_hash"] = hash;
  prov["version"] = KRONSR_VERSION;
  prov["seed"] = cfg.spec.base_seed;
  prov["config_file"] = cfg.config_file ? Json(cfg.config_file->string()) : Json(nullptr);
  prov["config"] = Json::object();
  for (const auto& [k, v] : cfg.settings) prov["config"][k] = v;
  prov["overrides"] = Json::array();
  for (const auto& o : cfg.overrides)
    prov["overrides"].push_back({{"key", o.key}, {"file", o.file_value}, {"flag", o.flag_value}});
  prov["started_at"] = started;
  prov["wall_clock_s"] = wall;
  prov["records"] = records.size();
  prov["failed"] = failed;
  prov["outputs"] = {"records.csv", "summary.json"};
  write_text(cfg.out_dir / "provenance.json", prov.dump(2) + "\n");

  print_summary(rows, log);
  log << "[kronsr] wrote " << (cfg.out_dir / "records.csv").string() << " (config " << hash << ", "
      << failed << " failed of " << records.size() << ")\n";
  return failed > 0 ? 2 : 0;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decomposition-based Kronecker sparse recovery experiments"};
  app.set_version_flag("--version", KRONSR_VERSION);
  app.require_subcommand(1);

  FlagValues run_flags;
  auto* run_cmd = app.add_subcommand("run", "run a Monte Carlo sweep and write CSV/JSON results");
  add_run_flags(*run_cmd, run_flags);

  FlagValues info_flags;
  auto* info_cmd = app.add_subcommand("info", "print the effective configuration and problem sizes");
  add_run_flags(*info_cmd, info_flags);

  FlagValues export_flags;
  std::string export_path;
  auto* export_cmd = app.add_subcommand("export-channel", "write one simulated channel instance as JSON");
  add_run_flags(*export_cmd, export_flags);
  export_cmd->add_option("--file", export_path, "output JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) return run(config_from_flags(run_flags), out);

    if (*info_cmd) {
      const RunConfig c = config_from_flags(info_flags);
      out << "kronsr " << KRONSR_VERSION << "\nconfig_hash " << c.config_hash() << "\n";
      for (const auto& [k, v] : c.settings) out << k << " = " << v << "\n";
      if (c.spec.scenario == Scenario::Channel) {
        const auto u = undersampling(c.spec.channel.geometry, c.spec.channel.protocol);
        out << "measurements " << u.measurements << "\ncoefficients " << u.coefficients << "\nratio "
            << u.ratio << "\n";
      } else {
        for (Index m : c.m) {
          SyntheticConfig s = c.spec.synthetic;
          s.m = m;
          Index rows = 1;
          for (Index r : s.row_dims()) rows *= r;
          Index cols = 1;
          for (Index i = 0; i < s.order(); ++i) cols *= s.N;
          out << "m " << m << ": measurements " << rows << ", coefficients " << cols << "\n";
        }
      }
      return 0;
    }

    if (*export_cmd) {
      auto flags = flag_map(export_flags);
      flags["run.scenario"] = "channel";
      const RunConfig c = export_flags.config
                              ? make_config(read_file(*export_flags.config), *export_flags.config, flags)
                              : make_config(std::nullopt, std::nullopt, flags);
      if (c.snr.size() != 1) throw UsageError("export-channel takes a single --snr value");
      std::mt19937_64 rng(c.spec.base_seed);
      const auto inst =
          simulate_channel_instance(c.spec.channel.geometry, c.spec.channel.protocol, c.snr.front(), rng);
      save_channel(inst, export_path);
      out << "wrote " << export_path << "\n";
      return 0;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace kronsr::cli
