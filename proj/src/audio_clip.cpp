#include "pvvasm/audio_clip.hpp"

#include <cmath>

#include "pvvasm/errors.hpp"

namespace pvvasm {

AudioClip::AudioClip(std::vector<double> samples, std::uint32_t sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
    if (sample_rate_ == 0) throw InputError("audio clip needs a positive sample rate");
    if (samples_.empty()) throw InputError("audio clip needs at least one sample");
    for (double v : samples_) {
        if (!std::isfinite(v)) throw InputError("audio clip contains a non-finite sample");
    }
}

double mean_power(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return acc / static_cast<double>(x.size());
}

double rms(std::span<const double> x) { return std::sqrt(mean_power(x)); }

double peak_abs(std::span<const double> x) {
    double p = 0.0;
    for (double v : x) p = std::max(p, std::abs(v));
    return p;
}

}  // namespace pvvasm
