#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>

#include "CLI11.hpp"
#include "bohrkit/errors.hpp"
#include "bohrkit/kernels.hpp"
#include "runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class Kind { integer, real, text, integers, flag };

struct Flag {
  const char* name;
  const char* key;
  Kind kind;
  const char* help;
};

// Per-command flags; each overrides analysis.<key> in the config.
const std::map<std::string, std::vector<Flag>>& flags() {
  static const std::map<std::string, std::vector<Flag>> f{
      {"riesz-check",
       {{"--stages", "stages", Kind::integer, "number of stages to absorb"},
        {"--support-cap", "support_cap", Kind::integer, "maximal exact support size"},
        {"--sigma-hat", "sigma_hat", Kind::flag, "also write the sigma-hat coefficients"}}},
      {"bourgain-scan",
       {{"--k-max", "k_max", Kind::integer, "number of scan steps"},
        {"--window", "window", Kind::integer, "greedy candidates per step"},
        {"--strategy", "strategy", Kind::text, "greedy or fixed-stride"},
        {"--threshold", "threshold", Kind::real, "verdict threshold on I_kmax"}}},
      {"guenais", {{"--K", "K", Kind::integer, "number of stages"}}},
      {"fejer",
       {{"--q", "q", Kind::integers, "stages of Q"}, {"--m", "m", Kind::integer, "the separate stage"}}},
      {"klemes",
       {{"--q", "q", Kind::integers, "stages of Q"}, {"--m", "m", Kind::integer, "stage beyond Q"}}},
      {"cs-bound",
       {{"--N", "N", Kind::integer, "last stage of the full product"},
        {"--subset", "subset", Kind::integers, "stages of the subproduct"}}},
      {"haar", {{"--q", "q", Kind::integers, "stages of Q"}, {"--m", "m", Kind::integers, "stages to test"}}},
      {"kac-clt", {{"--q", "q", Kind::integer, "number of phases"}}},
      {"kac-moments", {{"--l", "l", Kind::integers, "exponent tuple"}}},
      {"flatness", {{"--T", "T", Kind::real, "real-line span for the ultraflat scan"}}},
      {"prikhodko",
       {{"--m", "m", Kind::integer, "m_n"},
        {"--n", "n", Kind::integers, "sizes p_n"},
        {"--eps", "eps", Kind::text, "fixed eps_n as a rational"},
        {"--eps-times-n", "eps_times_n", Kind::integer, "eps_n = this / p_n"},
        {"--a", "a", Kind::real, "interval start"},
        {"--b", "b", Kind::real, "interval end"}}},
      {"degree-report", {{"--indices", "indices", Kind::integers, "stages to report"}}},
  };
  return f;
}

json convert(const Flag& f, const std::vector<std::string>& raw) {
  try {
    switch (f.kind) {
      case Kind::integer: return std::stoull(raw.at(0));
      case Kind::real: return std::stod(raw.at(0));
      case Kind::text: return raw.at(0);
      case Kind::flag: return true;
      case Kind::integers: {
        json out = json::array();
        for (const auto& s : raw) out.push_back(std::stoull(s));
        return out;
      }
    }
  } catch (const std::logic_error&) {
  }
  throw bohrkit::ValidationError(std::string(f.name) + ": cannot parse the value");
}

void write_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw bohrkit::ValidationError("cannot write " + tmp.string());
    os << text;
    if (!os.flush()) throw bohrkit::ValidationError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

struct Common {
  std::string config;
  std::string out = "results";
  std::uint64_t seed = 0;
  int threads = 0;
  std::uint64_t samples = 0;
  std::string method;
  bool quiet = false;
};

int execute(const std::string& command, const Common& c, const CLI::App& sub,
            const std::map<std::string, std::vector<std::string>>& raw) {
  json config = json::object();
  if (!c.config.empty()) {
    std::ifstream is(c.config);
    if (!is) throw bohrkit::ValidationError("config: cannot open " + c.config);
    try {
      config = json::parse(is);
    } catch (const json::parse_error& e) {
      throw bohrkit::ValidationError(std::string("config: ") + e.what());
    }
    if (!config.is_object()) throw bohrkit::ValidationError("config: expected a JSON object");
  }

  // Resolve: flags override the document; the seed is always explicit.
  if (sub.count("--seed"))
    config["seed"] = c.seed;
  else if (!config.contains("seed")) {
    std::random_device rd;
    config["seed"] = ((std::uint64_t{rd()} << 32) | rd()) >> 11;
  }
  if (!config.contains("analysis")) config["analysis"] = json::object();
  if (sub.count("--samples")) config["analysis"]["samples"] = c.samples;
  if (sub.count("--method")) config["analysis"]["method"] = c.method;
  for (const auto& f : flags().at(command))
    if (sub.count(f.name)) config["analysis"][f.key] = convert(f, raw.at(f.key));
  int threads = sub.count("--threads") ? c.threads : config.value("threads", 0);
  if (threads <= 0) threads = bohrkit::kernels::default_threads();
  config.erase("threads");  // results do not depend on it

  const std::string resolved = config.dump(2) + "\n";
  const std::string hash = hex(bohrkit::cli::fnv1a(config.dump()));
  const auto output = bohrkit::cli::run(command, config, threads);

  const json document{{"command", command}, {"config_hash", hash}, {"seed", config["seed"]}, {"result", output.result}};
  const std::string result_text = document.dump(2) + "\n";

  const fs::path dir(c.out);
  fs::create_directories(dir);
  std::vector<std::string> files;
  const auto emit = [&](const std::string& suffix, const std::string& text) {
    const std::string name = command + "." + suffix;
    write_atomic(dir / name, text);
    files.push_back(name);
  };
  emit("config.json", resolved);
  emit("json", result_text);
  emit("csv", bohrkit::cli::plot_csv(output.rows));
  for (const auto& e : output.extras) emit(e.suffix, e.text);
  const json manifest{{"command", command}, {"config_hash", hash},     {"seed", config["seed"]},
                      {"version", BOHRKIT_VERSION}, {"threads", threads}, {"created", utc_now()},
                      {"files", files}};
  write_atomic(dir / (command + ".manifest.json"), manifest.dump(2) + "\n");

  if (!c.quiet) std::cout << result_text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bohrkit: generalized Riesz products on the Bohr compactification"};
  app.require_subcommand(1);
  Common common;
  std::map<std::string, std::vector<std::string>> raw;

  for (const auto& name : bohrkit::cli::commands()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", common.config, "JSON config document");
    sub->add_option("-o,--out", common.out, "output directory")->capture_default_str();
    sub->add_option("--seed", common.seed, "master seed (overrides the config)");
    sub->add_option("--threads", common.threads, "worker threads (default: $BOHRKIT_THREADS or all)");
    sub->add_option("--samples", common.samples, "Monte Carlo samples");
    sub->add_option("--method", common.method, "automatic, tensor-quadrature or monte-carlo");
    sub->add_flag("--quiet", common.quiet, "do not echo the result");
    for (const auto& f : flags().at(name)) {
      if (f.kind == Kind::flag)
        sub->add_flag_callback(f.name, [&raw, key = f.key] { raw[key] = {"true"}; }, f.help);
      else if (f.kind == Kind::integers)
        sub->add_option(f.name, raw[f.key], f.help)->expected(1, -1);
      else
        sub->add_option(f.name, raw[f.key], f.help)->expected(1);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const CLI::App* sub = app.get_subcommands().front();
  try {
    return execute(sub->get_name(), common, *sub, raw);
  } catch (const bohrkit::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const bohrkit::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const bohrkit::BasisMismatch& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const bohrkit::BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return 3;
  } catch (const bohrkit::InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return 4;
  } catch (const bohrkit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 2;
  }
}
