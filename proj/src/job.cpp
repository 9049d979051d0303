#include "pvvasm/job.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "pvvasm/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace pvvasm {

std::string to_string(JobMode mode) {
    switch (mode) {
        case JobMode::TransformPerSample: return "transform";
        case JobMode::CorpusDistribution: return "corpus";
        case JobMode::VcPerReference: return "vc";
    }
    return "unknown";
}

JobMode job_mode_from_string(const std::string& s) {
    if (s == "transform") return JobMode::TransformPerSample;
    if (s == "corpus") return JobMode::CorpusDistribution;
    if (s == "vc") return JobMode::VcPerReference;
    throw ConfigError("unknown job mode '" + s + "' (expected transform, corpus or vc)");
}

namespace {

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\n')) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && s[i] == ' ') ++i;
    return s.substr(i);
}

std::string resolve(const std::string& p, const fs::path& base) {
    fs::path path(p);
    if (path.is_relative()) path = base / path;
    return path.lexically_normal().string();
}

template <class F>
void for_each_manifest_line(const std::string& path, F&& f) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open manifest " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        f(line, lineno);
    }
}

}  // namespace

std::vector<DatasetItem> load_dataset_manifest(const std::string& path) {
    const fs::path base = fs::path(path).parent_path();
    std::vector<DatasetItem> items;
    for_each_manifest_line(path, [&](const std::string& line, std::size_t lineno) {
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected <path>\\t<label>");
        }
        DatasetItem item;
        item.path = resolve(line.substr(0, tab), base);
        try {
            item.label = label_from_string(trim(line.substr(tab + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        items.push_back(std::move(item));
    });
    if (items.empty()) throw ConfigError("dataset manifest " + path + " lists no items");
    return items;
}

std::vector<CorpusEntry> load_corpus_manifest(const std::string& path) {
    const fs::path base = fs::path(path).parent_path();
    std::vector<CorpusEntry> entries;
    for_each_manifest_line(path, [&](const std::string& line, std::size_t) {
        const auto tab = line.find('\t');
        CorpusEntry e;
        e.path = resolve(line.substr(0, tab), base);
        if (tab != std::string::npos) e.group = trim(line.substr(tab + 1));
        entries.push_back(std::move(e));
    });
    if (entries.empty()) throw ConfigError("corpus manifest " + path + " lists no files");
    return entries;
}

// ---------------------------------------------------------------------------
// Job documents

json default_job_document() {
    const CertBudget b;
    return json{
        {"mode", "transform"},
        {"dataset", nullptr},
        {"corpus", nullptr},
        {"transform", nullptr},
        {"scorer", nullptr},
        {"budget",
         {{"n", b.n},
          {"k", b.k},
          {"delta", b.delta},
          {"alpha", b.alpha},
          {"t_range", {b.t_lo, b.t_hi}},
          {"grid_points", b.grid_points},
          {"cv_alpha_share", b.cv_alpha_share},
          {"cv_method_threshold", b.cv_method_threshold},
          {"bootstrap_resamples", b.bootstrap_resamples}}},
        {"epsilon_grid", {1e-5, 1e-3, 1e-2, 0.05}},
        {"seed", 0},
        {"sample_rate", 16000},
        {"splits", json::array()},
        {"batch_size", 256},
    };
}

namespace {

// Fills keys missing from `doc` with their defaults, recursing into objects.
void fill_defaults(json& doc, const json& defaults, const std::string& prefix) {
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (!defaults.contains(it.key())) {
            if (prefix.empty() || prefix == "budget.") {
                throw ConfigError("unknown job key '" + prefix + it.key() + "'");
            }
        }
    }
    for (auto it = defaults.begin(); it != defaults.end(); ++it) {
        if (!doc.contains(it.key())) {
            doc[it.key()] = it.value();
        } else if (it.value().is_object() && doc[it.key()].is_object()) {
            fill_defaults(doc[it.key()], it.value(), prefix + it.key() + ".");
        }
    }
}

void resolve_paths(json& doc, const fs::path& base) {
    for (const char* key : {"dataset", "corpus"}) {
        if (doc[key].is_string()) doc[key] = resolve(doc[key].get<std::string>(), base);
    }
    if (doc["transform"].is_object()) {
        std::function<void(json&)> walk = [&](json& t) {
            if (t.contains("assets") && t["assets"].is_string()) t["assets"] = resolve(t["assets"], base);
            if (t.contains("params") && t["params"].is_object()) {
                for (auto& [name, v] : t["params"].items()) {
                    if (v.is_string()) v = resolve(v.get<std::string>(), base);
                }
            }
            if (t.contains("children") && t["children"].is_array()) {
                for (auto& c : t["children"]) walk(c);
            }
        };
        walk(doc["transform"]);
    }
}

}  // namespace

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "' must look like key=value");
    }
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);

    json* node = &doc;
    std::istringstream keys(path);
    std::string key;
    while (std::getline(keys, key, '.')) {
        if (node->is_object() && node->contains(key)) {
            node = &(*node)[key];
        } else if (node->is_array() && !key.empty() &&
                   std::all_of(key.begin(), key.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
                   std::stoul(key) < node->size()) {
            node = &(*node)[std::stoul(key)];
        } else {
            throw ConfigError("override key '" + path + "' does not exist in the job schema");
        }
    }
    json value;
    try {
        value = json::parse(text);
    } catch (const json::exception&) {
        value = text;
    }
    *node = std::move(value);
}

json load_job_document(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open job file " + path);
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ConfigError("job file " + path + " is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("job file " + path + " must hold a JSON object");
    fill_defaults(doc, default_job_document(), "");
    for (const auto& o : overrides) apply_override(doc, o);
    resolve_paths(doc, fs::absolute(path).parent_path());
    return doc;
}

// ---------------------------------------------------------------------------
// Typed view

namespace {

template <class T>
T get_as(const json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("job key '" + key + "': " + e.what());
    }
}

std::size_t get_count(const json& j, const std::string& key) {
    const json& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ConfigError("job key '" + key + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

struct BankCache {
    std::uint32_t rate;
    std::map<std::string, AssetSet> banks;

    AssetSet get(const std::string& path) {
        auto it = banks.find(path);
        if (it != banks.end()) return it->second;
        return banks[path] = AssetBank::from_manifest(path, rate);
    }
};

TransformSpec parse_transform(const json& t, BankCache& cache, const fs::path& base) {
    if (!t.is_object()) throw ConfigError("transform section must be an object");
    for (auto it = t.begin(); it != t.end(); ++it) {
        static const char* allowed[] = {"preset", "assets", "kind", "params", "children", "max_rir_seconds"};
        if (std::find(std::begin(allowed), std::end(allowed), it.key()) == std::end(allowed)) {
            throw ConfigError("unknown transform key '" + it.key() + "'");
        }
    }
    TransformSpec spec;
    if (t.contains("preset")) {
        AssetSet bank;
        if (t.contains("assets") && !t["assets"].is_null()) bank = cache.get(resolve(get_as<std::string>(t, "assets"), base));
        spec = preset(get_as<std::string>(t, "preset"), bank);
        if (t.contains("kind")) throw ConfigError("transform section takes either preset or kind, not both");
    } else if (t.contains("kind")) {
        spec.kind = transform_kind_from_string(get_as<std::string>(t, "kind"));
    } else {
        throw ConfigError("transform section needs a preset or a kind");
    }
    if (t.contains("params")) {
        if (!t["params"].is_object()) throw ConfigError("transform params must be an object");
        for (const auto& [name, v] : t["params"].items()) {
            if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
                spec.params[name] = Interval{v[0].get<double>(), v[1].get<double>()};
            } else if (v.is_number()) {
                spec.params[name] = Interval{v.get<double>(), v.get<double>()};
            } else if (v.is_string()) {
                spec.params[name] = cache.get(resolve(v.get<std::string>(), base));
            } else {
                throw ConfigError("transform parameter '" + name + "' must be [lo, hi], a number or an asset manifest");
            }
        }
    }
    if (t.contains("children")) {
        if (!t["children"].is_array()) throw ConfigError("transform children must be an array");
        spec.children.clear();
        for (const auto& c : t["children"]) spec.children.push_back(parse_transform(c, cache, base));
    }
    if (t.contains("max_rir_seconds")) spec.max_rir_seconds = get_as<double>(t, "max_rir_seconds");
    spec.validate();
    return spec;
}

}  // namespace

TransformSpec transform_from_json(const json& section, std::uint32_t sample_rate, const std::string& base_dir) {
    BankCache cache{sample_rate, {}};
    return parse_transform(section, cache, fs::path(base_dir));
}

void VerificationJob::validate() const {
    budget.validate();
    if (epsilon_grid.empty()) throw ConfigError("epsilon_grid must be nonempty");
    for (std::size_t i = 0; i < epsilon_grid.size(); ++i) {
        const double e = epsilon_grid[i];
        if (!(e > 0.0 && e < 1.0)) throw ConfigError("epsilon_grid values must lie in (0, 1)");
        if (i > 0 && !(epsilon_grid[i - 1] < e)) throw ConfigError("epsilon_grid must be sorted ascending");
    }
    if (sample_rate == 0) throw ConfigError("sample_rate must be positive");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    switch (mode) {
        case JobMode::TransformPerSample:
            if (dataset.empty()) throw ConfigError("transform mode needs a dataset manifest");
            if (!transform) throw ConfigError("transform mode needs a transform section");
            break;
        case JobMode::CorpusDistribution:
        case JobMode::VcPerReference:
            if (corpus.empty()) throw ConfigError(to_string(mode) + " mode needs a corpus manifest");
            break;
    }
    if (!splits.empty()) {
        const std::size_t m = splits.front().first * splits.front().second;
        for (const auto& [n, k] : splits) {
            if (n == 0 || k == 0) throw ConfigError("splits need n, k >= 1");
            if (n * k != m) throw ConfigError("every split must have the same n*k");
        }
    }
}

VerificationJob job_from_document(const json& doc, const std::string& base_dir) {
    VerificationJob job;
    json full = doc;
    fill_defaults(full, default_job_document(), "");
    job.document = full;
    const fs::path base(base_dir);

    job.mode = job_mode_from_string(get_as<std::string>(full, "mode"));
    if (full["dataset"].is_string()) job.dataset = resolve(full["dataset"], base);
    if (full["corpus"].is_string()) job.corpus = resolve(full["corpus"], base);
    if (!full["scorer"].is_null()) job.scorer = ScorerHandle::parse(get_as<std::string>(full, "scorer"));
    if (!full["seed"].is_number_integer()) throw ConfigError("job key 'seed' must be an integer");
    job.seed = full["seed"].is_number_unsigned() ? full["seed"].get<std::uint64_t>()
                                                  : static_cast<std::uint64_t>(full["seed"].get<std::int64_t>());
    job.sample_rate = static_cast<std::uint32_t>(get_count(full, "sample_rate"));
    job.batch_size = get_count(full, "batch_size");

    const json& b = full["budget"];
    job.budget.n = get_count(b, "n");
    job.budget.k = get_count(b, "k");
    job.budget.delta = get_as<double>(b, "delta");
    job.budget.alpha = get_as<double>(b, "alpha");
    const auto t_range = get_as<std::vector<double>>(b, "t_range");
    if (t_range.size() != 2) throw ConfigError("budget.t_range must be [lo, hi]");
    job.budget.t_lo = t_range[0];
    job.budget.t_hi = t_range[1];
    job.budget.direction = job.budget.t_lo > 0.0 ? Direction::CertifySpoof : Direction::CertifyBonaFide;
    job.budget.grid_points = get_count(b, "grid_points");
    job.budget.cv_alpha_share = get_as<double>(b, "cv_alpha_share");
    job.budget.cv_method_threshold = get_as<double>(b, "cv_method_threshold");
    job.budget.bootstrap_resamples = get_count(b, "bootstrap_resamples");
    job.budget.seed = job.seed;

    job.epsilon_grid = get_as<std::vector<double>>(full, "epsilon_grid");
    for (const auto& s : full["splits"]) {
        if (!s.is_array() || s.size() != 2) throw ConfigError("each split must be [n, k]");
        job.splits.emplace_back(s[0].get<std::size_t>(), s[1].get<std::size_t>());
    }
    if (!full["transform"].is_null()) {
        job.transform = transform_from_json(full["transform"], job.sample_rate, base_dir);
    }
    job.validate();
    return job;
}

VerificationJob load_job(const std::string& path, const std::vector<std::string>& overrides) {
    const json doc = load_job_document(path, overrides);
    return job_from_document(doc, fs::absolute(path).parent_path().string());
}

}  // namespace pvvasm
