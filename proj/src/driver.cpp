#include "pvvasm/driver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "pvvasm/audio_io.hpp"
#include "pvvasm/errors.hpp"

namespace fs = std::filesystem;

namespace pvvasm {

namespace {

// Stream tags under the job seed.
constexpr std::uint64_t kItemStream = 0x6974656d;
constexpr std::uint64_t kCorpusStream = 0x636f7270;
constexpr std::uint64_t kBootstrapStream = 0x626f6f74;

// Lazily created scorers, one per worker slot.
class ScorerPool {
public:
    ScorerPool(const ScorerFactory& factory, std::size_t workers)
        : factory_(factory), scorers_(std::max<std::size_t>(workers, 1)) {}

    std::size_t size() const noexcept { return scorers_.size(); }

    Scorer& at(std::size_t slot) {
        if (!scorers_[slot]) {
            scorers_[slot] = factory_();
            if (!scorers_[slot]) throw ConfigError("scorer factory returned nothing");
        }
        return *scorers_[slot];
    }

    const std::string& name() {
        if (name_.empty()) name_ = at(0).name();
        return name_;
    }

private:
    const ScorerFactory& factory_;
    std::vector<std::unique_ptr<Scorer>> scorers_;
    std::string name_;
};

// Runs fn(index, scorer) for every index in [0, count). The first exception
// stops the remaining work and is rethrown.
template <class F>
void parallel_for(ScorerPool& pool, std::size_t count, F&& fn) {
    const std::size_t workers = std::min(pool.size(), std::max<std::size_t>(count, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i, pool.at(0));
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr first;
    std::mutex mu;
    auto body = [&](std::size_t slot) {
        try {
            Scorer& scorer = pool.at(slot);
            while (!stop.load()) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) break;
                fn(i, scorer);
            }
        } catch (...) {
            std::lock_guard lock(mu);
            if (!first) first = std::current_exception();
            stop.store(true);
        }
    };
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(body, w);
    for (auto& t : threads) t.join();
    if (first) std::rethrow_exception(first);
}

struct PoolOutcome {
    std::string id;
    std::optional<Label> label;
    std::optional<Label> initial;
    bool counted_correct = false;
    Direction direction = Direction::CertifyBonaFide;
    Seed seed = 0;
    std::vector<double> pool;
    std::string error;
};

std::string item_id(const std::string& path, const std::string& manifest) {
    const fs::path rel = fs::path(path).lexically_relative(fs::path(manifest).parent_path());
    return rel.empty() ? path : rel.string();
}

// Transform mode: one pool of k*n augmented scores per dataset item.
std::vector<PoolOutcome> transform_pools(const VerificationJob& job, ScorerPool& scorers, std::size_t n,
                                         std::size_t k) {
    const auto items = load_dataset_manifest(job.dataset);
    std::vector<PoolOutcome> out(items.size());
    parallel_for(scorers, items.size(), [&](std::size_t idx, Scorer& scorer) {
        PoolOutcome& o = out[idx];
        o.id = item_id(items[idx].path, job.dataset);
        o.label = items[idx].label;
        o.seed = substream(job.seed, kItemStream, idx);
        try {
            const AudioClip x = load_wav(ClipSource{items[idx].path, job.sample_rate});
            o.initial = classify(scorer.score(x));
            o.counted_correct = *o.initial == *o.label;
            o.direction = *o.initial == Label::BonaFide ? Direction::CertifyBonaFide : Direction::CertifySpoof;
            const ScoreMatrix m = augment_predict(scorer, *job.transform, x, n, k, o.seed, job.batch_size);
            o.pool.assign(m.pooled().begin(), m.pooled().end());
        } catch (const ScorerError&) {
            throw;
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            o.error = e.what();
            o.pool.clear();
        }
    });
    return out;
}

// Corpus and VC modes: m files drawn without replacement per group.
std::vector<PoolOutcome> corpus_pools(const VerificationJob& job, ScorerPool& scorers, std::size_t m) {
    const auto entries = load_corpus_manifest(job.corpus);
    std::vector<std::string> group_names;
    std::map<std::string, std::vector<std::size_t>> groups;
    if (job.mode == JobMode::VcPerReference) {
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const std::string& g = entries[i].group;
            if (g.empty()) throw ConfigError("vc mode needs a group column for " + entries[i].path);
            if (!groups.contains(g)) group_names.push_back(g);
            groups[g].push_back(i);
        }
    } else {
        group_names.push_back(fs::path(job.corpus).filename().string());
        auto& all = groups[group_names.front()];
        for (std::size_t i = 0; i < entries.size(); ++i) all.push_back(i);
    }

    std::vector<PoolOutcome> out(group_names.size());
    for (std::size_t g = 0; g < group_names.size(); ++g) {
        PoolOutcome& o = out[g];
        o.id = group_names[g];
        o.direction = Direction::CertifySpoof;
        o.counted_correct = true;
        o.seed = substream(job.seed, kCorpusStream, g);
        const auto& members = groups[group_names[g]];
        if (members.size() < m) {
            throw ConfigError("corpus group '" + o.id + "' has " + std::to_string(members.size()) +
                              " files but n*k = " + std::to_string(m) + " are needed");
        }
        // Partial Fisher-Yates: the first m slots are a uniform draw without replacement.
        std::vector<std::size_t> order = members;
        Rng rng(o.seed);
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(uniform_index(rng, order.size() - i));
            std::swap(order[i], order[j]);
        }
        order.resize(m);

        o.pool.assign(m, 0.0);
        const std::size_t chunks = (m + job.batch_size - 1) / job.batch_size;
        try {
            parallel_for(scorers, chunks, [&](std::size_t c, Scorer& scorer) {
                const std::size_t lo = c * job.batch_size;
                const std::size_t hi = std::min(m, lo + job.batch_size);
                std::vector<AudioClip> clips;
                clips.reserve(hi - lo);
                for (std::size_t p = lo; p < hi; ++p) {
                    clips.push_back(load_wav(ClipSource{entries[order[p]].path, job.sample_rate}));
                }
                const auto scores = scorer.score_batch(clips);
                if (scores.size() != clips.size()) throw ScorerError("scorer returned a short batch");
                for (std::size_t p = lo; p < hi; ++p) o.pool[p] = scores[p - lo].p_bonafide;
            });
        } catch (const ScorerError&) {
            throw;
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            o.error = e.what();
            o.pool.clear();
        }
    }
    return out;
}

CertBudget item_budget(const VerificationJob& job, const PoolOutcome& o, std::size_t n, std::size_t k) {
    CertBudget b = job.budget.oriented(o.direction);
    b.n = n;
    b.k = k;
    b.seed = substream(o.seed, kBootstrapStream);
    return b;
}

VerificationReport build_report(const VerificationJob& job, const std::vector<PoolOutcome>& pools,
                                const std::string& scorer_name, std::size_t n, std::size_t k) {
    VerificationReport r;
    r.mode = job.mode;
    r.scorer_name = scorer_name;
    r.epsilon_grid = job.epsilon_grid;
    r.config = job.document;
    const std::size_t E = job.epsilon_grid.size();
    std::vector<std::size_t> hits(E, 0);
    double sum_bound = 0.0;
    double sum_p = 0.0;
    std::size_t counted = 0;

    for (const auto& o : pools) {
        ItemResult item;
        item.id = o.id;
        item.label = o.label;
        item.initial = o.initial;
        item.counted_correct = o.counted_correct;
        item.error = o.error;
        item.certified.assign(E, false);
        if (o.error.empty()) {
            try {
                const ScoreMatrix scores = ScoreMatrix::from_pool(o.pool, n, k);
                const Certificate c = certify(scores, item_budget(job, o, n, k), job.epsilon_grid.front());
                item.certificate = c;
                for (std::size_t e = 0; e < E; ++e) item.certified[e] = c.at_epsilon(job.epsilon_grid[e]).certified;
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                item.error = e.what();
            }
        }
        if (item.certificate && item.counted_correct) {
            sum_bound += item.certificate->bound;
            sum_p += item.certificate->error_prob;
            ++counted;
        }
        for (std::size_t e = 0; e < E; ++e) {
            if (item.counted_correct && item.certified[e]) ++hits[e];
        }
        r.items.push_back(std::move(item));
    }
    r.pca.resize(E);
    for (std::size_t e = 0; e < E; ++e) {
        r.pca[e] = pools.empty() ? 0.0 : static_cast<double>(hits[e]) / static_cast<double>(pools.size());
    }
    if (job.mode == JobMode::CorpusDistribution) {
        std::vector<bool> binary(E);
        for (std::size_t e = 0; e < E; ++e) binary[e] = r.items.front().certified[e];
        r.binary_pca = binary;
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.mean_bound = counted ? sum_bound / static_cast<double>(counted) : nan;
    r.mean_error_prob = counted ? sum_p / static_cast<double>(counted) : nan;
    return r;
}

}  // namespace

ScorerFactory factory_for(const ScorerHandle& handle) {
    handle.validate();
    return [handle] { return make_scorer(handle); };
}

ScoreMatrix augment_predict(Scorer& scorer, const TransformSpec& transform, const AudioClip& x, std::size_t n,
                            std::size_t k, Seed seed, std::size_t batch_size) {
    if (n == 0 || k == 0) throw ConfigError("augment_predict needs n, k >= 1");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    const std::size_t total = n * k;
    std::vector<double> values(total);
    std::vector<AudioClip> batch;
    batch.reserve(std::min(batch_size, total));
    std::size_t start = 0;
    auto flush = [&] {
        std::vector<ScoreResult> scores;
        try {
            scores = scorer.score_batch(batch);
        } catch (const ScorerError& e) {
            throw ScorerError("scoring samples " + std::to_string(start) + ".." +
                                  std::to_string(start + batch.size() - 1) + " (batch j=" + std::to_string(start / n) +
                                  ", i=" + std::to_string(start % n) + "): " + e.what(),
                              e.payload());
        }
        if (scores.size() != batch.size()) throw ScorerError("scorer returned a short batch");
        for (std::size_t b = 0; b < scores.size(); ++b) values[start + b] = scores[b].p_bonafide;
        start += batch.size();
        batch.clear();
    };
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                const ParamAssignment theta = sample_params(transform, substream(seed, j, i));
                batch.push_back(apply(transform, x, theta));
            } catch (const ConfigError& e) {
                throw ConfigError("transform at (j=" + std::to_string(j) + ", i=" + std::to_string(i) + "): " + e.what());
            } catch (const AssetError& e) {
                throw AssetError("transform at (j=" + std::to_string(j) + ", i=" + std::to_string(i) + "): " + e.what());
            }
            if (batch.size() == batch_size) flush();
        }
    }
    if (!batch.empty()) flush();
    return ScoreMatrix(k, n, std::move(values));
}

SampleOutcome certify_sample(Scorer& scorer, const TransformSpec& transform, const AudioClip& x, Label label,
                             const CertBudget& budget, double epsilon, Seed seed, std::size_t batch_size) {
    SampleOutcome out;
    out.initial = classify(scorer.score(x));
    out.counted_correct = out.initial == label;
    const Direction d = out.initial == Label::BonaFide ? Direction::CertifyBonaFide : Direction::CertifySpoof;
    const CertBudget b = budget.oriented(d);
    const ScoreMatrix scores = augment_predict(scorer, transform, x, b.n, b.k, seed, batch_size);
    out.certificate = certify(scores, b, epsilon);
    return out;
}

VerificationReport run_transform_job(const VerificationJob& job, const ScorerFactory& factory,
                                     const RunOptions& options) {
    if (job.mode != JobMode::TransformPerSample) throw ConfigError("run_transform_job needs a transform-mode job");
    job.validate();
    ScorerPool scorers(factory, options.workers);
    const auto pools = transform_pools(job, scorers, job.budget.n, job.budget.k);
    return build_report(job, pools, scorers.name(), job.budget.n, job.budget.k);
}

VerificationReport run_corpus_job(const VerificationJob& job, const ScorerFactory& factory,
                                  const RunOptions& options) {
    if (job.mode == JobMode::TransformPerSample) throw ConfigError("run_corpus_job needs a corpus or vc job");
    job.validate();
    ScorerPool scorers(factory, options.workers);
    const auto pools = corpus_pools(job, scorers, job.budget.n * job.budget.k);
    return build_report(job, pools, scorers.name(), job.budget.n, job.budget.k);
}

std::vector<Certificate> certify_pool_splits(std::span<const double> pool, const CertBudget& budget,
                                             const std::vector<std::pair<std::size_t, std::size_t>>& splits,
                                             double epsilon) {
    std::vector<Certificate> out;
    out.reserve(splits.size());
    for (const auto& [n, k] : splits) {
        if (n * k != pool.size()) throw ConfigError("split does not match the pool size");
        CertBudget b = budget;
        b.n = n;
        b.k = k;
        out.push_back(certify(ScoreMatrix::from_pool(pool, n, k), b, epsilon));
    }
    return out;
}

std::vector<VerificationReport> run_budget_sweep(const VerificationJob& job, const ScorerFactory& factory,
                                                 const RunOptions& options) {
    job.validate();
    auto splits = job.splits;
    if (splits.empty()) splits.emplace_back(job.budget.n, job.budget.k);
    const std::size_t m = splits.front().first * splits.front().second;

    ScorerPool scorers(factory, options.workers);
    const auto pools = job.mode == JobMode::TransformPerSample ? transform_pools(job, scorers, m, 1)
                                                               : corpus_pools(job, scorers, m);
    std::vector<VerificationReport> out;
    for (const auto& [n, k] : splits) {
        VerificationReport r = build_report(job, pools, scorers.name(), n, k);
        r.split = std::make_pair(n, k);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace pvvasm
