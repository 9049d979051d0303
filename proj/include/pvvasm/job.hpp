#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pvvasm/certifier.hpp"
#include "pvvasm/rng.hpp"
#include "pvvasm/scorer.hpp"
#include "pvvasm/transforms.hpp"

namespace pvvasm {

enum class JobMode { TransformPerSample, CorpusDistribution, VcPerReference };

std::string to_string(JobMode mode);
JobMode job_mode_from_string(const std::string& s);

struct DatasetItem {
    std::string path;
    Label label = Label::BonaFide;
};

struct CorpusEntry {
    std::string path;
    std::string group;
};

// `<path>\t<label>` per line; relative paths resolve against the manifest.
std::vector<DatasetItem> load_dataset_manifest(const std::string& path);
// `<path>` or `<path>\t<group>` per line.
std::vector<CorpusEntry> load_corpus_manifest(const std::string& path);

struct VerificationJob {
    JobMode mode = JobMode::TransformPerSample;
    std::string dataset;
    std::string corpus;
    std::optional<TransformSpec> transform;
    CertBudget budget;
    std::vector<double> epsilon_grid;
    Seed seed = 0;
    std::optional<ScorerHandle> scorer;
    std::uint32_t sample_rate = 16000;
    std::vector<std::pair<std::size_t, std::size_t>> splits;
    std::size_t batch_size = 256;

    // Fully resolved document; echoed into reports.
    nlohmann::json document;

    void validate() const;
};

// Job document with every key present. Optional sections are null.
nlohmann::json default_job_document();

// `a.b.c=value`; the path must already exist in `doc`. Values that parse as
// JSON are used as such, anything else is taken as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Reads a job file, fills defaults and applies overrides. Relative paths in
// the document resolve against the job file's directory.
nlohmann::json load_job_document(const std::string& path, const std::vector<std::string>& overrides = {});

VerificationJob job_from_document(const nlohmann::json& doc, const std::string& base_dir = ".");
VerificationJob load_job(const std::string& path, const std::vector<std::string>& overrides = {});

// Transform section: either {"preset": name, "assets": manifest?} or
// {"kind": k, "params": {name: [lo, hi] | value | "manifest"}, "children": [...]}.
TransformSpec transform_from_json(const nlohmann::json& section, std::uint32_t sample_rate,
                                  const std::string& base_dir = ".");

}  // namespace pvvasm
