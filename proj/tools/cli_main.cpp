#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pvvasm/audio_io.hpp"
#include "pvvasm/driver.hpp"
#include "pvvasm/errors.hpp"
#include "pvvasm/job.hpp"
#include "pvvasm/report.hpp"
#include "pvvasm/scorer.hpp"

namespace fs = std::filesystem;
using namespace pvvasm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitScorer = 3;

struct Common {
    std::string job_path;
    std::string out_dir;
    std::vector<std::string> overrides;
    std::size_t workers = 0;
    std::optional<std::uint64_t> seed;
    std::string scorer;
    std::string export_dir;
    bool clip_export = false;
    int verbosity = 0;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--job", c.job_path, "Job file (JSON)")->required();
    cmd->add_option("--out", c.out_dir, "Output directory")->required();
    cmd->add_option("--set", c.overrides, "Override a job key, e.g. budget.n=500 (repeatable)");
    cmd->add_option("--workers", c.workers, "Worker threads (default: available cores)");
    cmd->add_option("--seed", c.seed, "Override the job seed");
    cmd->add_option("--scorer", c.scorer, "Override the scorer spec");
    cmd->add_flag("-v,--verbose", c.verbosity, "Log progress to stderr");
}

VerificationJob load(const Common& c) {
    std::vector<std::string> overrides = c.overrides;
    auto doc = load_job_document(c.job_path, overrides);
    if (c.seed) doc["seed"] = *c.seed;
    if (!c.scorer.empty()) doc["scorer"] = c.scorer;
    VerificationJob job = job_from_document(doc, fs::absolute(c.job_path).parent_path().string());
    if (!job.scorer) throw ConfigError("no scorer configured (set \"scorer\" in the job or pass --scorer)");
    return job;
}

RunOptions run_options(const Common& c) {
    RunOptions o;
    o.workers = c.workers ? c.workers : std::max(1u, std::thread::hardware_concurrency());
    return o;
}

void log(const Common& c, const std::string& msg) {
    if (c.verbosity > 0) std::cerr << "pvvasm: " << msg << "\n";
}

void summarize(const VerificationReport& r) {
    std::printf("scorer %s, %zu items, mean bound %.6g, mean error prob %.6g\n", r.scorer_name.c_str(),
                r.items.size(), r.mean_bound, r.mean_error_prob);
    for (std::size_t e = 0; e < r.epsilon_grid.size(); ++e) {
        std::printf("  eps=%-10g pca=%.4f", r.epsilon_grid[e], r.pca[e]);
        if (r.binary_pca) std::printf(" certified=%s", (*r.binary_pca)[e] ? "yes" : "no");
        std::printf("\n");
    }
}

// One augmented realization per dataset item, theta drawn from substream (seed, 0, 0).
void export_augmented(const VerificationJob& job, const Common& c) {
    fs::create_directories(c.export_dir);
    const auto items = load_dataset_manifest(job.dataset);
    for (std::size_t i = 0; i < items.size(); ++i) {
        const AudioClip x = load_wav(ClipSource{items[i].path, job.sample_rate});
        const auto theta = sample_params(*job.transform, substream(job.seed, i, 0));
        const AudioClip y = apply(*job.transform, x, theta);
        const fs::path dst = fs::path(c.export_dir) / (std::to_string(i) + "_" + fs::path(items[i].path).stem().string() + ".wav");
        save_wav(y, dst.string(), c.clip_export);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probabilistic verification of voice anti-spoofing models"};
    app.require_subcommand(1);

    Common transform_opts;
    auto* certify_transform = app.add_subcommand("certify-transform", "Certify every dataset item under a transform");
    add_common(certify_transform, transform_opts);
    certify_transform->add_option("--export-augmented", transform_opts.export_dir,
                                  "Also write one augmented clip per item to this directory");
    certify_transform->add_flag("--clip", transform_opts.clip_export, "Clip exported audio to [-1, 1]");

    Common corpus_opts;
    auto* certify_corpus = app.add_subcommand("certify-corpus", "Certify a generated corpus (corpus or vc mode)");
    add_common(certify_corpus, corpus_opts);

    Common sweep_opts;
    auto* sweep = app.add_subcommand("sweep", "Re-split one score pool across the job's (n, k) splits");
    add_common(sweep, sweep_opts);

    std::string probe_spec;
    auto* probe = app.add_subcommand("probe-scorer", "Handshake, double-score a probe tone, report latency");
    probe->add_option("--scorer", probe_spec, "Scorer spec")->required();

    auto* version = app.add_subcommand("version", "Print the version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (version->parsed()) {
            std::printf("pvvasm %s\n", PVVASM_VERSION);
            return kExitOk;
        }
        if (probe->parsed()) {
            const auto scorer = make_scorer(ScorerHandle::parse(probe_spec));
            const ProbeReport r = probe_scorer(*scorer);
            std::printf("name: %s\n", r.name.c_str());
            std::printf("first: p_spoof=%.17g p_bonafide=%.17g\n", r.first.p_spoof, r.first.p_bonafide);
            std::printf("second: p_spoof=%.17g p_bonafide=%.17g\n", r.second.p_spoof, r.second.p_bonafide);
            std::printf("deterministic: %s\n", r.deterministic ? "yes" : "no");
            std::printf("latency_ms: %.3f\n", r.latency_ms);
            return r.deterministic ? kExitOk : kExitScorer;
        }
        if (certify_transform->parsed()) {
            const Common& c = transform_opts;
            const VerificationJob job = load(c);
            if (job.mode != JobMode::TransformPerSample) throw ConfigError("certify-transform needs mode \"transform\"");
            log(c, "running transform job from " + c.job_path);
            const auto report = run_transform_job(job, factory_for(*job.scorer), run_options(c));
            write_report(c.out_dir, report);
            if (!c.export_dir.empty()) export_augmented(job, c);
            summarize(report);
            return kExitOk;
        }
        if (certify_corpus->parsed()) {
            const Common& c = corpus_opts;
            const VerificationJob job = load(c);
            log(c, "running " + to_string(job.mode) + " job from " + c.job_path);
            const auto report = run_corpus_job(job, factory_for(*job.scorer), run_options(c));
            write_report(c.out_dir, report);
            summarize(report);
            return kExitOk;
        }
        if (sweep->parsed()) {
            const Common& c = sweep_opts;
            const VerificationJob job = load(c);
            log(c, "running sweep from " + c.job_path);
            const auto reports = run_budget_sweep(job, factory_for(*job.scorer), run_options(c));
            write_sweep(c.out_dir, reports);
            std::fputs(sweep_to_csv(reports).c_str(), stdout);
            return kExitOk;
        }
    } catch (const ScorerError& e) {
        std::cerr << "pvvasm: scorer failure: " << e.what() << "\n";
        if (!e.payload().empty()) std::cerr << "pvvasm: offending record: " << e.payload() << "\n";
        return kExitScorer;
    } catch (const ConfigError& e) {
        std::cerr << "pvvasm: configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "pvvasm: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "pvvasm: unexpected error: " << e.what() << "\n";
        return 1;
    }
    return kExitConfig;
}
