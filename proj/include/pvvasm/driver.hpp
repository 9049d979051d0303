#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pvvasm/audio_clip.hpp"
#include "pvvasm/certifier.hpp"
#include "pvvasm/job.hpp"
#include "pvvasm/scorer.hpp"
#include "pvvasm/transforms.hpp"

namespace pvvasm {

// Creates one scorer per worker thread.
using ScorerFactory = std::function<std::unique_ptr<Scorer>()>;

ScorerFactory factory_for(const ScorerHandle& handle);

// Entry [j][i] is p_bonafide of the scored transform phi(x, theta_ji), with
// theta_ji drawn from substream (seed, j, i). Clips are scored in chunks of
// `batch_size`.
ScoreMatrix augment_predict(Scorer& scorer, const TransformSpec& transform, const AudioClip& x, std::size_t n,
                            std::size_t k, Seed seed, std::size_t batch_size = 256);

struct SampleOutcome {
    Certificate certificate;
    Label initial = Label::Spoof;
    bool counted_correct = false;
};

SampleOutcome certify_sample(Scorer& scorer, const TransformSpec& transform, const AudioClip& x, Label label,
                             const CertBudget& budget, double epsilon, Seed seed, std::size_t batch_size = 256);

struct ItemResult {
    std::string id;
    std::optional<Label> label;
    std::optional<Label> initial;
    bool counted_correct = false;
    // Evaluated at the first epsilon of the grid; empty when the item failed.
    std::optional<Certificate> certificate;
    // One flag per epsilon of the grid.
    std::vector<bool> certified;
    std::string error;
};

struct VerificationReport {
    JobMode mode = JobMode::TransformPerSample;
    std::string scorer_name;
    std::vector<double> epsilon_grid;
    std::vector<ItemResult> items;
    std::vector<double> pca;
    std::optional<std::vector<bool>> binary_pca;
    // Means over items that produced a certificate; NaN when none did.
    double mean_bound = 0.0;
    double mean_error_prob = 0.0;
    std::optional<std::pair<std::size_t, std::size_t>> split;
    nlohmann::json config;
};

struct RunOptions {
    std::size_t workers = 1;
};

VerificationReport run_transform_job(const VerificationJob& job, const ScorerFactory& factory,
                                     const RunOptions& options = {});
// Handles both corpus and per-reference VC jobs.
VerificationReport run_corpus_job(const VerificationJob& job, const ScorerFactory& factory,
                                  const RunOptions& options = {});

// One certificate per split from a single shared pool (pool.size() == n*k for
// every split).
std::vector<Certificate> certify_pool_splits(std::span<const double> pool, const CertBudget& budget,
                                             const std::vector<std::pair<std::size_t, std::size_t>>& splits,
                                             double epsilon);

// One report per split. Every item's pool of m scores is sampled once and
// reshaped for each split.
std::vector<VerificationReport> run_budget_sweep(const VerificationJob& job, const ScorerFactory& factory,
                                                 const RunOptions& options = {});

}  // namespace pvvasm
