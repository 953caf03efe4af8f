#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <omp.h>

#include "CLI11.hpp"
#include "scenario.hpp"

namespace fs = std::filesystem;
using namespace sdom::cli;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_outputs(const fs::path& dir, const RunResult& result) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create " + dir.string() + ": " + ec.message());
  for (const auto& [name, text] : result.files) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out || !(out << text)) throw ConfigError("cannot write " + (dir / name).string());
  }
}

int run(const std::string& config, const std::string& template_name, const std::vector<std::string>& overrides,
        std::optional<std::uint64_t> seed, const std::string& out_dir) {
  if (config.empty() == template_name.empty()) throw ConfigError("give either --config PATH or a template name");
  Json doc;
  const std::string text = config.empty() ? template_text(template_name) : read_file(config);
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  for (const auto& o : overrides) apply_override(doc, o);
  if (seed) apply_override(doc, "seeds.base=" + std::to_string(*seed));
  const auto scenario = validate(std::move(doc));

  const auto t0 = std::chrono::steady_clock::now();
  const auto result = run_scenario(scenario);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const fs::path dir = out_dir.empty() ? fs::path("sdom_out") / scenario.name : fs::path(out_dir);
  write_outputs(dir, result);
  for (const auto& c : result.checks)
    std::printf("%-4s  %-28s constant %.6g  tolerance %.6g\n", c.pass ? "pass" : "FAIL", c.name.c_str(), c.constant,
                c.tolerance);
  std::printf("%s: %zu checks, %.2f s, outputs in %s\n", scenario.name.c_str(), result.checks.size(), secs,
              dir.string().c_str());
  if (scenario.doc.contains("budget_seconds") && secs > scenario.doc["budget_seconds"].get<double>())
    std::fprintf(stderr, "warning: run took %.2f s, over the declared budget of %g s\n", secs,
                 scenario.doc["budget_seconds"].get<double>());
  return result.all_pass() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sdom: sparse domination verification scenarios"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "cap on worker threads")->check(CLI::PositiveNumber);

  auto* run_cmd = app.add_subcommand("run", "run a scenario from a file or a bundled template");
  std::string config, template_name, out_dir;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  run_cmd->add_option("template", template_name, "bundled template name");
  run_cmd->add_option("--config", config, "scenario JSON file");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "base seed, replaces seeds.base");
  run_cmd->add_option("--out", out_dir, "output directory (default sdom_out/<name>)");
  run_cmd->add_option("--override", overrides, "dotted key=value, repeatable")->allow_extra_args(false);
  run_cmd->add_option("--threads", threads, "cap on worker threads")->check(CLI::PositiveNumber);

  app.add_subcommand("list", "list bundled scenario templates");

  auto* describe_cmd = app.add_subcommand("describe", "print the schema of a verification kind");
  std::string kind;
  describe_cmd->add_option("kind", kind, "verification kind")->required();

  auto* show_cmd = app.add_subcommand("show", "print a bundled template");
  std::string show_name;
  show_cmd->add_option("template", show_name, "template name")->required();

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*run_cmd)
      return run(config, template_name, overrides, seed_opt->count() ? std::optional<std::uint64_t>(seed) : std::nullopt,
                 out_dir);
    if (app.got_subcommand("list")) {
      for (const auto& name : template_names()) {
        const auto s = parse_scenario(template_text(name));
        std::printf("%-24s %s\n", name.c_str(), s.kind.c_str());
      }
      std::printf("\nkinds:");
      for (const auto& k : kind_names()) std::printf(" %s", k.c_str());
      std::printf("\n");
      return 0;
    }
    if (*describe_cmd) {
      std::fputs(describe_kind(kind).c_str(), stdout);
      return 0;
    }
    if (*show_cmd) {
      std::fputs(template_text(show_name).c_str(), stdout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
