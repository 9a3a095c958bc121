#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gsq/config.hpp"
#include "gsq/experiments.hpp"
#include "gsq/report.hpp"

namespace {

using gsq::harness::ExperimentConfig;

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  std::uint64_t paths = 0;
  int workers = 0;
  bool quiet = false;
};

ExperimentConfig resolve(const std::string& name, const Flags& f) {
  ExperimentConfig c = f.config.empty() ? gsq::harness::preset(name) : gsq::harness::load_config(f.config);
  if (c.name != name)
    throw gsq::ConfigParseError("experiment.name: config is for '" + c.name + "', not '" + name + "'", 0,
                                "experiment.name");
  if (f.seed_set) {
    c.seed = f.seed;
    c.has_seed = true;
  }
  if (!f.out.empty()) c.out = f.out;
  if (f.paths > 0) c.paths = f.paths;
  if (f.workers > 0) c.workers = f.workers;
  return c;
}

bool report(const gsq::harness::ExperimentRecord& rec, const std::string& out, bool quiet) {
  const auto files = gsq::harness::emit_report(rec, out);
  if (!quiet) {
    for (const auto& c : rec.checks())
      std::printf("%s  %s%s%s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.empty() ? "" : "  ",
                  c.detail.c_str());
    for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
  }
  return rec.passed();
}

/// Small versions of every experiment; exit status reflects their checks.
int selftest(const Flags& f) {
  const std::string root = f.out.empty() ? (std::filesystem::temp_directory_path() / "gsq_selftest").string() : f.out;
  std::vector<ExperimentConfig> runs;
  for (const char* name : {"spectrum", "quantize", "propagate", "signature"}) runs.push_back(gsq::harness::preset(name));
  runs[0].cutoff = 4;
  runs[2].cutoff = 4;
  auto bm = gsq::harness::preset("brownian-pi");
  bm.hamiltonians = {"zero", "const:0.5"};
  bm.r = {1, 4};
  bm.paths = 2000;
  bm.steps_per_unit = 64;
  runs.push_back(bm);
  auto sm = gsq::harness::preset("smooth-pi");
  sm.hamiltonians = {"zero"};
  sm.r = {2};
  sm.n = {4, 16};
  sm.paths = 1000;
  runs.push_back(sm);
  bool ok = true;
  for (auto& c : runs) {
    if (f.workers > 0) c.workers = f.workers;
    const auto rec = gsq::harness::run_experiment(c);
    const bool passed = report(rec, (std::filesystem::path(root) / c.name).string(), f.quiet);
    if (!f.quiet) std::printf("%s  selftest %s\n", passed ? "PASS" : "FAIL", c.name.c_str());
    ok = ok && passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric quantization on compact groups: spectra, quantization and path integrals"};
  app.require_subcommand(1);
  Flags f;
  auto add_flags = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "experiment config file")->check(CLI::ExistingFile);
    sub->add_option_function<std::uint64_t>(
        "--seed",
        [&](const std::uint64_t& s) {
          f.seed = s;
          f.seed_set = true;
        },
        "override the seed");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--paths", f.paths, "override the number of Monte Carlo paths");
    sub->add_option("--workers", f.workers, "worker threads (results do not depend on it)");
    sub->add_flag("--quiet", f.quiet, "print nothing");
  };
  std::vector<std::pair<std::string, CLI::App*>> subs;
  for (const char* name : {"spectrum", "quantize", "propagate", "brownian-pi", "smooth-pi", "signature"}) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    add_flags(sub);
    subs.emplace_back(name, sub);
  }
  auto* self = app.add_subcommand("selftest", "run small versions of every experiment");
  add_flags(self);
  CLI11_PARSE(app, argc, argv);

  try {
    if (self->parsed()) return selftest(f);
    for (const auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      const ExperimentConfig c = resolve(name, f);
      const auto rec = gsq::harness::run_experiment(c);
      return report(rec, c.out, f.quiet) ? 0 : 1;
    }
  } catch (const gsq::ConfigParseError& e) {
    std::fprintf(stderr, "config error (line %zu, field %s): %s\n", e.line, e.field.c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 2;
}
