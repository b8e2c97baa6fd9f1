#pragma once

#include "parex/config.hpp"

namespace parex::run {

// Each command writes its artifacts into out_dir and returns the process exit
// semantics: 0 = pass, 2 = check failed, 3 = saturation. Config problems are
// thrown as Error(ConfigError) and map to exit code 1 at the API boundary.
int ce_check(const RunConfig& cfg, const std::string& out_dir);
int recurrence(const RunConfig& cfg, const std::string& out_dir);
int exclusion_run(const RunConfig& cfg, const std::string& out_dir);
int density_scan(const RunConfig& cfg, const std::string& out_dir);
int lemma_probe(const RunConfig& cfg, const std::string& lemma_id, const std::string& out_dir);
int startup_scan_cmd(const RunConfig& cfg, const std::string& out_dir);

const std::vector<std::string>& lemma_ids();

}  // namespace parex::run
