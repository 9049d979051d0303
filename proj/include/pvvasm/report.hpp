#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "pvvasm/driver.hpp"

namespace pvvasm {

nlohmann::json report_to_json(const VerificationReport& report);

// Columns: item, bound, t_star, c_hat, c_tilde, error_prob, certified@<eps>...
std::string report_to_csv(const VerificationReport& report);

// One row per split: n, k, mean_bound, mean_error_prob, pca@<eps>...
std::string sweep_to_csv(const std::vector<VerificationReport>& reports);

// Writes via a temporary sibling file and rename.
void write_file_atomic(const std::string& path, const std::string& contents);

// Writes report.txt, report.csv and config_echo into `dir` (created if
// needed). Sweeps additionally get sweep.csv.
void write_report(const std::string& dir, const VerificationReport& report);
void write_sweep(const std::string& dir, const std::vector<VerificationReport>& reports);

}  // namespace pvvasm
