#include "pvvasm/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "pvvasm/audio_io.hpp"
#include "pvvasm/dsp.hpp"
#include "pvvasm/errors.hpp"

namespace pvvasm {

namespace {

struct KindName {
    TransformKind kind;
    const char* name;
};

constexpr KindName kKindNames[] = {
    {TransformKind::Gain, "gain"},
    {TransformKind::LowPass, "lowpass"},
    {TransformKind::HighPass, "highpass"},
    {TransformKind::BandPass, "bandpass"},
    {TransformKind::GaussianNoise, "gaussian_noise"},
    {TransformKind::BackgroundNoise, "background_noise"},
    {TransformKind::PitchShift, "pitch_shift"},
    {TransformKind::TimeStretch, "time_stretch"},
    {TransformKind::RIR, "rir"},
    {TransformKind::Composite, "composite"},
};

std::vector<std::string> required_params(TransformKind kind) {
    switch (kind) {
        case TransformKind::Gain: return {"gain_db"};
        case TransformKind::LowPass: return {"cutoff_hz"};
        case TransformKind::HighPass: return {"cutoff_hz"};
        case TransformKind::BandPass: return {"center_hz", "bandwidth_ratio"};
        case TransformKind::GaussianNoise: return {"sigma"};
        case TransformKind::BackgroundNoise: return {"snr_db", "noise"};
        case TransformKind::PitchShift: return {"semitones"};
        case TransformKind::TimeStretch: return {"rate"};
        case TransformKind::RIR: return {"rir"};
        case TransformKind::Composite: return {};
    }
    return {};
}

bool is_asset_param(const std::string& name) { return name == "noise" || name == "rir"; }

}  // namespace

std::string to_string(TransformKind kind) {
    for (const auto& kn : kKindNames) {
        if (kn.kind == kind) return kn.name;
    }
    return "unknown";
}

TransformKind transform_kind_from_string(const std::string& s) {
    for (const auto& kn : kKindNames) {
        if (s == kn.name) return kn.kind;
    }
    if (s == "lpf") return TransformKind::LowPass;
    if (s == "hpf") return TransformKind::HighPass;
    if (s == "bpf") return TransformKind::BandPass;
    throw ConfigError("unknown transform kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// AssetBank

AssetBank::AssetBank(std::string name, std::vector<AudioClip> clips, std::vector<std::string> paths)
    : name_(std::move(name)), clips_(std::move(clips)), paths_(std::move(paths)) {
    if (clips_.empty()) throw ConfigError("asset bank '" + name_ + "' is empty");
}

std::shared_ptr<const AssetBank> AssetBank::from_manifest(const std::string& manifest_path, std::uint32_t sample_rate) {
    std::ifstream in(manifest_path);
    if (!in) throw ConfigError("cannot open asset manifest " + manifest_path);
    const std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();
    std::vector<AudioClip> clips;
    std::vector<std::string> paths;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::filesystem::path p(line);
        if (p.is_relative()) p = base / p;
        try {
            clips.push_back(load_wav(ClipSource{p.string(), sample_rate}));
        } catch (const Error& e) {
            throw AssetError("asset " + p.string() + " from " + manifest_path + ": " + e.what());
        }
        paths.push_back(p.string());
    }
    if (clips.empty()) throw ConfigError("asset manifest " + manifest_path + " lists no files");
    return std::make_shared<const AssetBank>(manifest_path, std::move(clips), std::move(paths));
}

const AudioClip& AssetBank::at(std::size_t i) const {
    if (i >= clips_.size()) throw AssetError("asset index out of range in bank '" + name_ + "'");
    return clips_[i];
}

// ---------------------------------------------------------------------------
// TransformSpec

void TransformSpec::validate() const {
    if (kind == TransformKind::Composite) {
        if (children.empty()) throw ConfigError("composite transform needs at least one child");
        if (!params.empty()) throw ConfigError("composite transform takes no parameters of its own");
        for (const auto& c : children) c.validate();
        return;
    }
    if (!children.empty()) throw ConfigError(to_string(kind) + " transform cannot have children");
    for (const auto& name : required_params(kind)) {
        if (!params.contains(name)) throw ConfigError(to_string(kind) + " transform is missing parameter '" + name + "'");
    }
    for (const auto& [name, space] : params) {
        const auto req = required_params(kind);
        if (std::find(req.begin(), req.end(), name) == req.end()) {
            throw ConfigError(to_string(kind) + " transform has unknown parameter '" + name + "'");
        }
        if (is_asset_param(name)) {
            const auto* bank = std::get_if<AssetSet>(&space);
            if (!bank || !*bank || (*bank)->size() == 0) {
                throw ConfigError("parameter '" + name + "' needs a nonempty asset set");
            }
        } else {
            const auto* iv = std::get_if<Interval>(&space);
            if (!iv) throw ConfigError("parameter '" + name + "' must be an interval");
            if (!std::isfinite(iv->lo) || !std::isfinite(iv->hi) || iv->lo > iv->hi) {
                throw ConfigError("parameter '" + name + "' needs a finite interval with lo <= hi");
            }
        }
    }
    if (kind == TransformKind::TimeStretch && !(std::get<Interval>(params.at("rate")).lo > 0.0)) {
        throw ConfigError("time stretch rate must be positive");
    }
    if (kind == TransformKind::GaussianNoise && std::get<Interval>(params.at("sigma")).lo < 0.0) {
        throw ConfigError("noise sigma must be non-negative");
    }
    if (!(max_rir_seconds > 0.0)) throw ConfigError("max_rir_seconds must be positive");
}

double ParamAssignment::value(const std::string& name) const {
    auto it = values.find(name);
    if (it == values.end()) throw ConfigError("parameter assignment lacks '" + name + "'");
    return it->second;
}

std::size_t ParamAssignment::asset(const std::string& name) const {
    auto it = assets.find(name);
    if (it == assets.end()) throw ConfigError("parameter assignment lacks asset '" + name + "'");
    return it->second;
}

ParamAssignment sample_params(const TransformSpec& spec, Seed seed) {
    Rng rng(seed);
    return sample_params(spec, rng);
}

ParamAssignment sample_params(const TransformSpec& spec, Rng& rng) {
    spec.validate();
    ParamAssignment theta;
    if (spec.kind == TransformKind::Composite) {
        for (const auto& child : spec.children) {
            theta.children.push_back(sample_params(child, rng));
        }
        return theta;
    }
    // std::map iterates in key order, so draw order is fixed.
    for (const auto& [name, space] : spec.params) {
        if (const auto* iv = std::get_if<Interval>(&space)) {
            theta.values[name] = iv->lo == iv->hi ? iv->lo : uniform(rng, iv->lo, iv->hi);
        } else {
            const auto& bank = std::get<AssetSet>(space);
            theta.assets[name] = static_cast<std::size_t>(uniform_index(rng, bank->size()));
        }
    }
    if (spec.kind == TransformKind::GaussianNoise) theta.noise_seed = rng();
    if (spec.kind == TransformKind::BackgroundNoise) theta.offset = uniform01(rng);
    return theta;
}

// ---------------------------------------------------------------------------
// Individual transforms

namespace transforms {

double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }

AudioClip gain(const AudioClip& x, double gain_db) {
    if (gain_db == 0.0) return x;
    const double g = db_to_amplitude(gain_db);
    std::vector<double> y(x.samples().begin(), x.samples().end());
    for (double& v : y) v *= g;
    return AudioClip(std::move(y), x.sample_rate());
}

AudioClip gaussian_noise(const AudioClip& x, double sigma, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> y(x.samples().begin(), x.samples().end());
    for (double& v : y) v += sigma * normal(rng);
    return AudioClip(std::move(y), x.sample_rate());
}

std::vector<double> background_noise_component(const AudioClip& x, const AudioClip& noise, double snr_db,
                                               double offset) {
    if (noise.sample_rate() != x.sample_rate()) {
        throw AssetError("noise asset sample rate " + std::to_string(noise.sample_rate()) + " differs from clip rate " +
                         std::to_string(x.sample_rate()));
    }
    const std::size_t len = x.size();
    const std::size_t noise_len = noise.size();
    std::vector<double> segment(len);
    std::size_t start = 0;
    if (noise_len >= len) {
        start = std::min(static_cast<std::size_t>(offset * static_cast<double>(noise_len - len + 1)), noise_len - len);
    } else {
        start = std::min(static_cast<std::size_t>(offset * static_cast<double>(noise_len)), noise_len - 1);
    }
    const auto ns = noise.samples();
    for (std::size_t i = 0; i < len; ++i) segment[i] = ns[(start + i) % noise_len];

    const double signal_power = mean_power(x.samples());
    const double noise_power = mean_power(segment);
    if (signal_power == 0.0) return std::vector<double>(len, 0.0);
    if (!(noise_power > 0.0)) throw AssetError("noise asset segment is silent");
    const double scale = std::sqrt(signal_power / (noise_power * std::pow(10.0, snr_db / 10.0)));
    for (double& v : segment) v *= scale;
    return segment;
}

AudioClip background_noise(const AudioClip& x, const AudioClip& noise, double snr_db, double offset) {
    const std::vector<double> component = background_noise_component(x, noise, snr_db, offset);
    std::vector<double> y(x.samples().begin(), x.samples().end());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += component[i];
    return AudioClip(std::move(y), x.sample_rate());
}

AudioClip time_stretch(const AudioClip& x, double rate) {
    return AudioClip(dsp::time_stretch(x.samples(), rate, x.sample_rate()), x.sample_rate());
}

AudioClip pitch_shift(const AudioClip& x, double semitones) {
    if (semitones == 0.0) return x;
    const double ratio = std::pow(2.0, semitones / 12.0);
    // Stretch to len * ratio, then read back at `ratio` samples per output sample.
    const std::vector<double> stretched = dsp::time_stretch(x.samples(), 1.0 / ratio, x.sample_rate());
    return AudioClip(dsp::resample_linear(stretched, x.size()), x.sample_rate());
}

AudioClip room_impulse(const AudioClip& x, const AudioClip& rir, double max_rir_seconds) {
    if (rir.sample_rate() != x.sample_rate()) throw AssetError("impulse response sample rate differs from clip rate");
    if (rir.duration_seconds() > max_rir_seconds) {
        throw AssetError("impulse response of " + std::to_string(rir.duration_seconds()) + " s exceeds the " +
                         std::to_string(max_rir_seconds) + " s cap");
    }
    std::vector<double> y = dsp::convolve(x.samples(), rir.samples());
    y.resize(x.size());
    const double in_peak = peak_abs(x.samples());
    const double out_peak = peak_abs(y);
    if (out_peak > 0.0) {
        const double scale = in_peak / out_peak;
        for (double& v : y) v *= scale;
    }
    return AudioClip(std::move(y), x.sample_rate());
}

}  // namespace transforms

AudioClip apply(const TransformSpec& spec, const AudioClip& x, const ParamAssignment& theta) {
    const double nyquist = 0.5 * x.sample_rate();
    switch (spec.kind) {
        case TransformKind::Gain:
            return transforms::gain(x, theta.value("gain_db"));
        case TransformKind::LowPass:
            return AudioClip(dsp::filter(dsp::butterworth_lowpass(theta.value("cutoff_hz"), x.sample_rate()), x.samples()),
                             x.sample_rate());
        case TransformKind::HighPass:
            return AudioClip(
                dsp::filter(dsp::butterworth_highpass(theta.value("cutoff_hz"), x.sample_rate()), x.samples()),
                x.sample_rate());
        case TransformKind::BandPass: {
            const double center = theta.value("center_hz");
            const double ratio = theta.value("bandwidth_ratio");
            const double low = center * (1.0 - ratio / 2.0);
            const double high = center * (1.0 + ratio / 2.0);
            if (high >= nyquist) {
                throw ConfigError("band-pass upper edge " + std::to_string(high) + " Hz is at or above Nyquist");
            }
            return AudioClip(dsp::filter(dsp::butterworth_bandpass(low, high, x.sample_rate()), x.samples()),
                             x.sample_rate());
        }
        case TransformKind::GaussianNoise:
            return transforms::gaussian_noise(x, theta.value("sigma"), theta.noise_seed);
        case TransformKind::BackgroundNoise: {
            const auto& bank = std::get<AssetSet>(spec.params.at("noise"));
            return transforms::background_noise(x, bank->at(theta.asset("noise")), theta.value("snr_db"), theta.offset);
        }
        case TransformKind::PitchShift:
            return transforms::pitch_shift(x, theta.value("semitones"));
        case TransformKind::TimeStretch:
            return transforms::time_stretch(x, theta.value("rate"));
        case TransformKind::RIR: {
            const auto& bank = std::get<AssetSet>(spec.params.at("rir"));
            return transforms::room_impulse(x, bank->at(theta.asset("rir")), spec.max_rir_seconds);
        }
        case TransformKind::Composite: {
            if (theta.children.size() != spec.children.size()) {
                throw ConfigError("composite assignment does not match the number of children");
            }
            AudioClip y = x;
            for (std::size_t i = 0; i < spec.children.size(); ++i) y = apply(spec.children[i], y, theta.children[i]);
            return y;
        }
    }
    throw ConfigError("unhandled transform kind");
}

// ---------------------------------------------------------------------------
// Presets

namespace {

TransformSpec simple(TransformKind kind, std::map<std::string, ParamSpace> params) {
    TransformSpec s;
    s.kind = kind;
    s.params = std::move(params);
    return s;
}

}  // namespace

TransformSpec preset(const std::string& name, AssetSet bank) {
    using K = TransformKind;
    if (name == "gain") return simple(K::Gain, {{"gain_db", Interval{-10.0, 10.0}}});
    if (name == "gain_wide") return simple(K::Gain, {{"gain_db", Interval{-10.0, 20.0}}});
    if (name == "lpf") return simple(K::LowPass, {{"cutoff_hz", Interval{2500.0, 3000.0}}});
    if (name == "hpf") return simple(K::HighPass, {{"cutoff_hz", Interval{500.0, 1000.0}}});
    if (name == "bpf") {
        return simple(K::BandPass, {{"center_hz", Interval{200.0, 4000.0}}, {"bandwidth_ratio", Interval{0.5, 1.99}}});
    }
    if (name == "bpf_narrow") {
        return simple(K::BandPass, {{"center_hz", Interval{200.0, 1500.0}}, {"bandwidth_ratio", Interval{1.2, 1.5}}});
    }
    if (name == "pitch_shift") return simple(K::PitchShift, {{"semitones", Interval{-6.0, 6.0}}});
    if (name == "time_stretch") return simple(K::TimeStretch, {{"rate", Interval{0.75, 1.35}}});
    if (name == "background_noise") {
        if (!bank) throw ConfigError("preset background_noise needs a noise asset manifest");
        return simple(K::BackgroundNoise, {{"snr_db", Interval{15.0, 30.0}}, {"noise", bank}});
    }
    if (name == "rir") {
        if (!bank) throw ConfigError("preset rir needs an impulse-response asset manifest");
        return simple(K::RIR, {{"rir", bank}});
    }
    if (name == "composite") {
        TransformSpec s;
        s.kind = K::Composite;
        s.children = {preset("gain"), preset("lpf"), simple(K::GaussianNoise, {{"sigma", Interval{0.01, 0.03}}})};
        return s;
    }
    throw ConfigError("unknown transform preset '" + name + "'");
}

std::vector<std::string> preset_names() {
    return {"gain",         "gain_wide",        "lpf",         "hpf", "bpf", "bpf_narrow",
            "pitch_shift",  "time_stretch",     "background_noise", "rir", "composite"};
}

}  // namespace pvvasm
