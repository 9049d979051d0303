#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pvvasm/audio_clip.hpp"
#include "pvvasm/rng.hpp"

namespace pvvasm {

enum class TransformKind {
    Gain,
    LowPass,
    HighPass,
    BandPass,
    GaussianNoise,
    BackgroundNoise,
    PitchShift,
    TimeStretch,
    RIR,
    Composite,
};

std::string to_string(TransformKind kind);
TransformKind transform_kind_from_string(const std::string& s);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Read-only corpus of noise or impulse-response clips, shared across threads.
class AssetBank {
public:
    AssetBank(std::string name, std::vector<AudioClip> clips, std::vector<std::string> paths = {});

    // One audio path per line; blank lines and '#' comments skipped; relative
    // paths resolve against the manifest's directory. Every clip is brought
    // to `sample_rate`.
    static std::shared_ptr<const AssetBank> from_manifest(const std::string& manifest_path, std::uint32_t sample_rate);

    const std::string& name() const noexcept { return name_; }
    std::size_t size() const noexcept { return clips_.size(); }
    const AudioClip& at(std::size_t i) const;
    const std::vector<std::string>& paths() const noexcept { return paths_; }

private:
    std::string name_;
    std::vector<AudioClip> clips_;
    std::vector<std::string> paths_;
};

using AssetSet = std::shared_ptr<const AssetBank>;
using ParamSpace = std::variant<Interval, AssetSet>;

// Parametric transform phi(., theta) together with its parameter space Theta.
//
// Parameter names per kind:
//   Gain            gain_db
//   LowPass         cutoff_hz
//   HighPass        cutoff_hz
//   BandPass        center_hz, bandwidth_ratio
//   GaussianNoise   sigma
//   BackgroundNoise snr_db, noise (asset)
//   PitchShift      semitones
//   TimeStretch     rate
//   RIR             rir (asset)
struct TransformSpec {
    TransformKind kind = TransformKind::Gain;
    std::map<std::string, ParamSpace> params;
    std::vector<TransformSpec> children;
    // Impulse responses longer than this are rejected when applied.
    double max_rir_seconds = 3.0;

    void validate() const;
};

// A point theta in a TransformSpec's parameter space.
struct ParamAssignment {
    std::map<std::string, double> values;
    std::map<std::string, std::size_t> assets;
    // Realization seed for stochastic transforms (Gaussian noise).
    std::uint64_t noise_seed = 0;
    // Uniform [0, 1) position used to crop/loop background noise.
    double offset = 0.0;
    std::vector<ParamAssignment> children;

    double value(const std::string& name) const;
    std::size_t asset(const std::string& name) const;

    friend bool operator==(const ParamAssignment&, const ParamAssignment&) = default;
};

// Each interval drawn uniformly and independently; assets uniformly from the bank.
ParamAssignment sample_params(const TransformSpec& spec, Seed seed);
ParamAssignment sample_params(const TransformSpec& spec, Rng& rng);

AudioClip apply(const TransformSpec& spec, const AudioClip& x, const ParamAssignment& theta);

// Parameter spaces used for verification in the reference experiments.
// Names: gain, gain_wide, lpf, hpf, bpf, bpf_narrow, background_noise,
// pitch_shift, time_stretch, rir, composite. Asset-backed presets need a bank.
TransformSpec preset(const std::string& name, AssetSet bank = nullptr);
std::vector<std::string> preset_names();

namespace transforms {

double db_to_amplitude(double db);

AudioClip gain(const AudioClip& x, double gain_db);
AudioClip gaussian_noise(const AudioClip& x, double sigma, std::uint64_t seed);
// Noise segment (looped or cropped at `offset`) scaled to the requested SNR
// over full-clip power. A silent input is returned unchanged.
AudioClip background_noise(const AudioClip& x, const AudioClip& noise, double snr_db, double offset);
// The scaled noise segment that background_noise adds.
std::vector<double> background_noise_component(const AudioClip& x, const AudioClip& noise, double snr_db,
                                               double offset);
AudioClip pitch_shift(const AudioClip& x, double semitones);
AudioClip time_stretch(const AudioClip& x, double rate);
AudioClip room_impulse(const AudioClip& x, const AudioClip& rir, double max_rir_seconds);

}  // namespace transforms

}  // namespace pvvasm
