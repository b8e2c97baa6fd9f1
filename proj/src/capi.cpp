#include "parex.h"

#include <cstring>
#include <string>

#include "parex/config.hpp"
#include "parex/runner.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

parex_status code_of(const parex::Error& e) {
  switch (e.code()) {
    case parex::ErrorCode::ConfigError: return PAREX_ERR_CONFIG;
    case parex::ErrorCode::CheckFailed: return PAREX_ERR_CHECK_FAILED;
    case parex::ErrorCode::HorizonSaturated: return PAREX_ERR_SATURATED;
    default: return PAREX_ERR_RUNTIME;
  }
}

template <typename Fn>
parex_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const parex::Error& e) {
    set_error(e.what());
    return code_of(e);
  } catch (const std::exception& e) {
    set_error(e.what());
    return PAREX_ERR_RUNTIME;
  } catch (...) {
    set_error("unknown error");
    return PAREX_ERR_RUNTIME;
  }
}

}  // namespace

struct parex_config {
  parex::RunConfig cfg;
  std::string fingerprint;
};

struct parex_family {
  parex::MarkedFamily fam;
  parex::ClassifyOptions opt;
};

extern "C" {

const char* parex_version(void) { return "parex 1.0.0"; }

const char* parex_last_error(void) { return g_last_error.c_str(); }

parex_config* parex_config_default(void) { return new parex_config{parex::RunConfig{}, {}}; }

parex_config* parex_config_preset(const char* name) {
  if (!name) {
    set_error("null preset name");
    return nullptr;
  }
  try {
    return new parex_config{parex::RunConfig::preset(name), {}};
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

parex_config* parex_config_load(const char* path) {
  if (!path) {
    set_error("null config path");
    return nullptr;
  }
  try {
    return new parex_config{parex::RunConfig::load(path), {}};
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

parex_config* parex_config_parse(const char* text) {
  if (!text) {
    set_error("null config text");
    return nullptr;
  }
  try {
    return new parex_config{parex::RunConfig::parse(text), {}};
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

void parex_config_free(parex_config* cfg) { delete cfg; }

parex_status parex_config_set(parex_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) {
    set_error("null argument");
    return PAREX_ERR_CONFIG;
  }
  return guarded([&]() {
    cfg->cfg.set(key, value);
    return PAREX_OK;
  });
}

const char* parex_config_fingerprint(parex_config* cfg) {
  if (!cfg) {
    set_error("null config");
    return "";
  }
  cfg->fingerprint = cfg->cfg.fingerprint();
  return cfg->fingerprint.c_str();
}

parex_status parex_run_ce_check(const parex_config* cfg, const char* out_dir) {
  if (!cfg || !out_dir) {
    set_error("null argument");
    return PAREX_ERR_CONFIG;
  }
  return guarded([&]() {
    const int rc = parex::run::ce_check(cfg->cfg, out_dir);
    return rc == 0 ? PAREX_OK : PAREX_ERR_CHECK_FAILED;
  });
}

parex_status parex_run_recurrence(const parex_config* cfg, const char* out_dir) {
  if (!cfg || !out_dir) {
    set_error("null argument");
    return PAREX_ERR_CONFIG;
  }
  return guarded([&]() {
    const int rc = parex::run::recurrence(cfg->cfg, out_dir);
    return rc == 0 ? PAREX_OK : PAREX_ERR_CHECK_FAILED;
  });
}

parex_status parex_run_exclusion(const parex_config* cfg, const char* out_dir) {
  if (!cfg || !out_dir) {
    set_error("null argument");
    return PAREX_ERR_CONFIG;
  }
  return guarded([&]() {
    const int rc = parex::run::exclusion_run(cfg->cfg, out_dir);
    if (rc == 3) {
      set_error("bound-period saturation above the configured fraction");
      return PAREX_ERR_SATURATED;
    }
    return PAREX_OK;
  });
}

parex_status parex_run_density_scan(const parex_config* cfg, const char* out_dir) {
  if (!cfg || !out_dir) {
    set_error("null argument");
    return PAREX_ERR_CONFIG;
  }
  return guarded([&]() {
    parex::run::density_scan(cfg->cfg, out_dir);
    return PAREX_OK;
  });
}

parex_status parex_run_lemma_probe(const parex_config* cfg, const char* lemma_id,
                                   const char* out_dir) {
  if (!cfg || !lemma_id || !out_dir) {
    set_error("null argument");
    return PAREX_ERR_CONFIG;
  }
  return guarded([&]() {
    parex::run::lemma_probe(cfg->cfg, lemma_id, out_dir);
    return PAREX_OK;
  });
}

parex_status parex_run_startup_scan(const parex_config* cfg, const char* out_dir) {
  if (!cfg || !out_dir) {
    set_error("null argument");
    return PAREX_ERR_CONFIG;
  }
  return guarded([&]() {
    parex::run::startup_scan_cmd(cfg->cfg, out_dir);
    return PAREX_OK;
  });
}

parex_family* parex_family_create(const parex_config* cfg) {
  if (!cfg) {
    set_error("null config");
    return nullptr;
  }
  try {
    return new parex_family{cfg->cfg.build_family(), cfg->cfg.make_classify_options()};
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

void parex_family_free(parex_family* fam) { delete fam; }

parex_status parex_family_xi(const parex_family* fam, double a_re, double a_im, int l, long n,
                             double* out_re, double* out_im, int* out_chart) {
  if (!fam || !out_re || !out_im || !out_chart) {
    set_error("null argument");
    return PAREX_ERR_CONFIG;
  }
  return guarded([&]() {
    const parex::SpherePoint z = parex::xi(fam->fam, {a_re, a_im}, l, n);
    *out_re = z.value.real();
    *out_im = z.value.imag();
    *out_chart = z.chart == parex::Chart::Finite ? 0 : 1;
    return PAREX_OK;
  });
}

parex_status parex_classify_parameter(const parex_family* fam, double a_re, double a_im,
                                      long horizon, int max_period, int* out_verdict,
                                      int* out_period, double* out_mult_re,
                                      double* out_mult_im) {
  if (!fam || !out_verdict) {
    set_error("null argument");
    return PAREX_ERR_CONFIG;
  }
  return guarded([&]() {
    parex::ClassifyOptions opt = fam->opt;
    if (max_period > 0) opt.max_period = max_period;
    const parex::HyperbolicityVerdict v =
        parex::classify_parameter(fam->fam, {a_re, a_im}, horizon, opt);
    switch (v.status) {
      case parex::HypStatus::Hyperbolic: *out_verdict = 0; break;
      case parex::HypStatus::Undetermined: *out_verdict = 1; break;
      case parex::HypStatus::NumericFailure: *out_verdict = 2; break;
    }
    if (!v.cycles.empty()) {
      if (out_period) *out_period = v.cycles.front().period;
      if (out_mult_re) *out_mult_re = v.cycles.front().multiplier.real();
      if (out_mult_im) *out_mult_im = v.cycles.front().multiplier.imag();
    } else if (out_period) {
      *out_period = 0;
    }
    return PAREX_OK;
  });
}

}  // extern "C"
