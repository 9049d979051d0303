#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pvvasm/audio_clip.hpp"

namespace pvvasm {

enum class Label { Spoof, BonaFide };

std::string to_string(Label label);
Label label_from_string(const std::string& s);

// Classifier output (p_spoof, p_bonafide); the pair sums to one.
struct ScoreResult {
    double p_spoof = 0.5;
    double p_bonafide = 0.5;

    friend bool operator==(const ScoreResult&, const ScoreResult&) = default;
};

// Validates ranges and renormalizes pairs whose sum is within `tolerance` of
// one; throws ScorerError otherwise.
ScoreResult make_score(double p_spoof, double p_bonafide, double tolerance = 1e-3);

// BonaFide iff p_bonafide > 1/2; an exact tie counts as Spoof.
Label classify(const ScoreResult& result);

// Black-box binary classifier f(x) = (p_spoof, p_bonafide).
// Instances are not required to be thread-safe; give each worker its own.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual ScoreResult score(const AudioClip& clip) = 0;
    // Order-preserving; fails as a whole rather than returning partial results.
    virtual std::vector<ScoreResult> score_batch(std::span<const AudioClip> clips);
    virtual std::string name() const = 0;
};

enum class ScorerKind { BuiltinEnergy, BuiltinCentroid, BuiltinConstant, ExternalBridge };

// Scorer configuration. Textual form (CLI --scorer, job "scorer"):
//   constant:<p_spoof>,<p_bonafide>
//   energy:slope=<a>,center=<c>       logistic(a * (rms_db - c))
//   centroid:slope=<a>,center=<c>     logistic(a * (centroid_hz - c))
//   bridge[@<timeout_ms>]:<command> [args...]
struct ScorerHandle {
    ScorerKind kind = ScorerKind::BuiltinConstant;
    double slope = 0.0;
    double center = 0.0;
    double p_spoof = 0.5;
    double p_bonafide = 0.5;
    std::vector<std::string> command;
    int timeout_ms = 30000;

    static ScorerHandle parse(const std::string& text);
    std::string to_string() const;
    void validate() const;
};

std::unique_ptr<Scorer> make_scorer(const ScorerHandle& handle);

class ConstantScorer final : public Scorer {
public:
    ConstantScorer(double p_spoof, double p_bonafide);
    ScoreResult score(const AudioClip& clip) override;
    std::string name() const override;

private:
    ScoreResult result_;
};

// p_bonafide = logistic(slope * (feature(clip) - center)).
class LogisticFeatureScorer : public Scorer {
public:
    LogisticFeatureScorer(double slope, double center) : slope_(slope), center_(center) {}
    ScoreResult score(const AudioClip& clip) override;
    virtual double feature(const AudioClip& clip) const = 0;

protected:
    double slope_;
    double center_;
};

// Feature: RMS level in dBFS (floored at -240 dB).
class EnergyScorer final : public LogisticFeatureScorer {
public:
    using LogisticFeatureScorer::LogisticFeatureScorer;
    double feature(const AudioClip& clip) const override;
    std::string name() const override;
};

// Feature: spectral centroid in Hz.
class CentroidScorer final : public LogisticFeatureScorer {
public:
    using LogisticFeatureScorer::LogisticFeatureScorer;
    double feature(const AudioClip& clip) const override;
    std::string name() const override;
};

struct ProbeReport {
    std::string name;
    bool deterministic = false;
    ScoreResult first;
    ScoreResult second;
    double latency_ms = 0.0;
};

// Scores a 1 s, 16 kHz probe tone twice and compares the results.
ProbeReport probe_scorer(Scorer& scorer);
AudioClip probe_tone();

}  // namespace pvvasm
