#include "pvvasm/scorer.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pvvasm/bridge.hpp"
#include "pvvasm/dsp.hpp"
#include "pvvasm/errors.hpp"

namespace pvvasm {

std::string to_string(Label label) { return label == Label::BonaFide ? "bonafide" : "spoof"; }

Label label_from_string(const std::string& s) {
    if (s == "bonafide" || s == "bona-fide" || s == "bona_fide") return Label::BonaFide;
    if (s == "spoof") return Label::Spoof;
    throw ConfigError("unknown label '" + s + "' (expected spoof or bonafide)");
}

ScoreResult make_score(double p_spoof, double p_bonafide, double tolerance) {
    if (!std::isfinite(p_spoof) || !std::isfinite(p_bonafide)) throw ScorerError("non-finite probability");
    if (p_spoof < 0.0 || p_bonafide < 0.0 || p_spoof > 1.0 || p_bonafide > 1.0) {
        throw ScorerError("probability outside [0, 1]");
    }
    const double sum = p_spoof + p_bonafide;
    if (std::abs(sum - 1.0) > tolerance) {
        throw ScorerError("probabilities sum to " + std::to_string(sum) + ", beyond the renormalization tolerance");
    }
    return ScoreResult{p_spoof / sum, p_bonafide / sum};
}

Label classify(const ScoreResult& result) { return result.p_bonafide > 0.5 ? Label::BonaFide : Label::Spoof; }

std::vector<ScoreResult> Scorer::score_batch(std::span<const AudioClip> clips) {
    std::vector<ScoreResult> out;
    out.reserve(clips.size());
    for (const auto& c : clips) out.push_back(score(c));
    return out;
}

// ---------------------------------------------------------------------------
// Builtins

ConstantScorer::ConstantScorer(double p_spoof, double p_bonafide) : result_(make_score(p_spoof, p_bonafide, 1e-9)) {}

ScoreResult ConstantScorer::score(const AudioClip&) { return result_; }

std::string ConstantScorer::name() const {
    std::ostringstream s;
    s << "constant(" << result_.p_spoof << "," << result_.p_bonafide << ")";
    return s.str();
}

ScoreResult LogisticFeatureScorer::score(const AudioClip& clip) {
    const double p = 1.0 / (1.0 + std::exp(-slope_ * (feature(clip) - center_)));
    return ScoreResult{1.0 - p, p};
}

double EnergyScorer::feature(const AudioClip& clip) const {
    return 20.0 * std::log10(std::max(rms(clip.samples()), 1e-12));
}

std::string EnergyScorer::name() const { return "energy"; }

double CentroidScorer::feature(const AudioClip& clip) const {
    return dsp::spectral_centroid(clip.samples(), clip.sample_rate());
}

std::string CentroidScorer::name() const { return "centroid"; }

// ---------------------------------------------------------------------------
// Handle parsing

namespace {

double parse_number(const std::string& s, const std::string& context) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("scorer spec: cannot parse '" + s + "' as a number in " + context);
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    return out;
}

}  // namespace

ScorerHandle ScorerHandle::parse(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("scorer spec '" + text + "' lacks a ':'");
    std::string kind = text.substr(0, colon);
    const std::string rest = text.substr(colon + 1);

    ScorerHandle h;
    if (kind == "constant") {
        const auto parts = split(rest, ',');
        if (parts.size() != 2) throw ConfigError("constant scorer needs constant:<p_spoof>,<p_bonafide>");
        h.kind = ScorerKind::BuiltinConstant;
        h.p_spoof = parse_number(parts[0], text);
        h.p_bonafide = parse_number(parts[1], text);
    } else if (kind == "energy" || kind == "centroid") {
        h.kind = kind == "energy" ? ScorerKind::BuiltinEnergy : ScorerKind::BuiltinCentroid;
        bool have_slope = false;
        bool have_center = false;
        for (const auto& kv : split(rest, ',')) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError("scorer spec: expected key=value, got '" + kv + "'");
            const std::string key = kv.substr(0, eq);
            const double v = parse_number(kv.substr(eq + 1), text);
            if (key == "slope") {
                h.slope = v;
                have_slope = true;
            } else if (key == "center") {
                h.center = v;
                have_center = true;
            } else {
                throw ConfigError("scorer spec: unknown key '" + key + "'");
            }
        }
        if (!have_slope || !have_center) throw ConfigError(kind + " scorer needs slope= and center=");
    } else if (kind.rfind("bridge", 0) == 0) {
        h.kind = ScorerKind::ExternalBridge;
        if (kind.size() > 6) {
            if (kind[6] != '@') throw ConfigError("bridge scorer spec must look like bridge[@timeout_ms]:command");
            h.timeout_ms = static_cast<int>(parse_number(kind.substr(7), text));
        }
        std::istringstream in(rest);
        std::string arg;
        while (in >> arg) h.command.push_back(arg);
    } else {
        throw ConfigError("unknown scorer kind '" + kind + "'");
    }
    h.validate();
    return h;
}

std::string ScorerHandle::to_string() const {
    std::ostringstream s;
    s.precision(17);
    switch (kind) {
        case ScorerKind::BuiltinConstant: s << "constant:" << p_spoof << "," << p_bonafide; break;
        case ScorerKind::BuiltinEnergy: s << "energy:slope=" << slope << ",center=" << center; break;
        case ScorerKind::BuiltinCentroid: s << "centroid:slope=" << slope << ",center=" << center; break;
        case ScorerKind::ExternalBridge:
            s << "bridge@" << timeout_ms << ":";
            for (std::size_t i = 0; i < command.size(); ++i) s << (i ? " " : "") << command[i];
            break;
    }
    return s.str();
}

void ScorerHandle::validate() const {
    switch (kind) {
        case ScorerKind::BuiltinConstant:
            try {
                (void)make_score(p_spoof, p_bonafide, 1e-9);
            } catch (const ScorerError& e) {
                throw ConfigError(std::string("constant scorer: ") + e.what());
            }
            break;
        case ScorerKind::BuiltinEnergy:
        case ScorerKind::BuiltinCentroid:
            if (!std::isfinite(slope) || !std::isfinite(center)) throw ConfigError("scorer slope/center must be finite");
            break;
        case ScorerKind::ExternalBridge:
            if (command.empty()) throw ConfigError("bridge scorer needs a command");
            if (timeout_ms <= 0) throw ConfigError("bridge timeout must be positive");
            break;
    }
}

std::unique_ptr<Scorer> make_scorer(const ScorerHandle& handle) {
    handle.validate();
    switch (handle.kind) {
        case ScorerKind::BuiltinConstant: return std::make_unique<ConstantScorer>(handle.p_spoof, handle.p_bonafide);
        case ScorerKind::BuiltinEnergy: return std::make_unique<EnergyScorer>(handle.slope, handle.center);
        case ScorerKind::BuiltinCentroid: return std::make_unique<CentroidScorer>(handle.slope, handle.center);
        case ScorerKind::ExternalBridge:
            return std::make_unique<BridgeScorer>(BridgeConfig{handle.command, handle.timeout_ms});
    }
    throw ConfigError("unhandled scorer kind");
}

// ---------------------------------------------------------------------------
// Probe

AudioClip probe_tone() {
    constexpr std::uint32_t rate = 16000;
    std::vector<double> s(rate);
    for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = 0.5 * std::sin(2.0 * std::numbers::pi * 440.0 * static_cast<double>(i) / rate);
    }
    return AudioClip(std::move(s), rate);
}

ProbeReport probe_scorer(Scorer& scorer) {
    const AudioClip tone = probe_tone();
    ProbeReport report;
    report.name = scorer.name();
    const auto start = std::chrono::steady_clock::now();
    report.first = scorer.score(tone);
    const auto mid = std::chrono::steady_clock::now();
    report.second = scorer.score(tone);
    report.latency_ms = std::chrono::duration<double, std::milli>(mid - start).count();
    report.deterministic = report.first == report.second;
    return report;
}

}  // namespace pvvasm
