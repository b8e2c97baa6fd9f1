// Batch experiment driver; links only the C API.
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "parex.h"

namespace {

struct ConfigDeleter {
  void operator()(parex_config* c) const { parex_config_free(c); }
};
using ConfigPtr = std::unique_ptr<parex_config, ConfigDeleter>;

struct CommonArgs {
  std::string config_file;
  std::string preset;
  std::string out_dir;
  std::vector<std::string> sets;  // section.key=value overrides
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_file, "run configuration file");
  cmd->add_option("-p,--preset", args.preset, "named preset (e.g. chebyshev, recurrent)");
  cmd->add_option("-o,--out", args.out_dir, "output directory (default: out)");
  cmd->add_option("--set", args.sets, "override a config key, section.key=value")
      ->take_all();
  // the most common knobs get first-class flags mirroring the config fields
  for (const char* key :
       {"family.id", "family.center_re", "family.center_im", "family.epsilon",
        "neighborhood.Delta", "neighborhood.DeltaPrime", "neighborhood.epsilon1",
        "conditions.C0", "conditions.gamma0", "conditions.gammaH", "conditions.tau",
        "conditions.alpha", "conditions.K", "conditions.iota", "horizons.orbit",
        "horizons.engine", "horizons.classify", "sampling.seed", "sampling.workers",
        "sampling.max_depth"}) {
    const std::string k = key;
    const std::string flag = "--" + k.substr(k.find('.') + 1);
    cmd->add_option_function<std::string>(
        flag, [&args, k](const std::string& v) { args.sets.push_back(k + "=" + v); }, k);
  }
}

ConfigPtr build_config(const CommonArgs& args, bool& ok) {
  ok = false;
  ConfigPtr cfg;
  if (!args.config_file.empty()) {
    cfg.reset(parex_config_load(args.config_file.c_str()));
  } else if (!args.preset.empty()) {
    cfg.reset(parex_config_preset(args.preset.c_str()));
  } else {
    cfg.reset(parex_config_default());
  }
  if (!cfg) {
    std::fprintf(stderr, "parex: %s\n", parex_last_error());
    return cfg;
  }
  if (!args.config_file.empty() && !args.preset.empty()) {
    std::fprintf(stderr, "parex: use either --config or --preset, not both\n");
    return ConfigPtr{};
  }
  for (const auto& s : args.sets) {
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "parex: --set needs section.key=value, got '%s'\n", s.c_str());
      return ConfigPtr{};
    }
    if (parex_config_set(cfg.get(), s.substr(0, eq).c_str(), s.substr(eq + 1).c_str()) !=
        PAREX_OK) {
      std::fprintf(stderr, "parex: %s\n", parex_last_error());
      return ConfigPtr{};
    }
  }
  // env overrides: output dir and worker count only
  if (const char* w = std::getenv("PAREX_WORKERS")) {
    if (parex_config_set(cfg.get(), "sampling.workers", w) != PAREX_OK) {
      std::fprintf(stderr, "parex: %s\n", parex_last_error());
      return ConfigPtr{};
    }
  }
  ok = true;
  return cfg;
}

std::string resolve_out_dir(const CommonArgs& args) {
  if (const char* env = std::getenv("PAREX_OUT_DIR")) return env;
  return args.out_dir.empty() ? "out" : args.out_dir;
}

int finish(parex_status st) {
  if (st != PAREX_OK) std::fprintf(stderr, "parex: %s\n", parex_last_error());
  return st;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parex: parameter exclusion, Collet-Eckmann verification and "
               "hyperbolicity scans for families of rational maps"};
  app.require_subcommand(1);

  CommonArgs ce_args, rec_args, ex_args, den_args, lem_args, st_args;
  std::string lemma_id;

  add_common(app.add_subcommand("ce-check", "Collet-Eckmann margin and slow recurrence"),
             ce_args);
  add_common(app.add_subcommand("recurrence", "basic approach-rate assumption check"), rec_args);
  add_common(app.add_subcommand("exclusion-run", "full partition-and-exclusion run"), ex_args);
  add_common(app.add_subcommand("density-scan", "hyperbolicity density around a parameter"),
             den_args);
  auto* lem = app.add_subcommand("lemma-probe", "empirical probe of one quantitative lemma");
  add_common(lem, lem_args);
  lem->add_option("lemma", lemma_id, "lemma id")->required();
  add_common(app.add_subcommand("startup-scan", "first essential return or escape of the square"),
             st_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? PAREX_ERR_CONFIG : 0;
  }

  auto dispatch = [&](const char* name, CommonArgs& args,
                      parex_status (*fn)(const parex_config*, const char*)) -> int {
    if (!app.get_subcommand(name)->parsed()) return -1;
    bool ok = false;
    ConfigPtr cfg = build_config(args, ok);
    if (!ok) return PAREX_ERR_CONFIG;
    return finish(fn(cfg.get(), resolve_out_dir(args).c_str()));
  };

  if (int rc = dispatch("ce-check", ce_args, parex_run_ce_check); rc >= 0) return rc;
  if (int rc = dispatch("recurrence", rec_args, parex_run_recurrence); rc >= 0) return rc;
  if (int rc = dispatch("exclusion-run", ex_args, parex_run_exclusion); rc >= 0) return rc;
  if (int rc = dispatch("density-scan", den_args, parex_run_density_scan); rc >= 0) return rc;
  if (int rc = dispatch("startup-scan", st_args, parex_run_startup_scan); rc >= 0) return rc;
  if (app.get_subcommand("lemma-probe")->parsed()) {
    bool ok = false;
    ConfigPtr cfg = build_config(lem_args, ok);
    if (!ok) return PAREX_ERR_CONFIG;
    return finish(
        parex_run_lemma_probe(cfg.get(), lemma_id.c_str(), resolve_out_dir(lem_args).c_str()));
  }
  return PAREX_ERR_CONFIG;
}
