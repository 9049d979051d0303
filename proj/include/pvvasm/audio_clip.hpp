#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pvvasm {

// Mono waveform. Samples are nominally in [-1, 1] but transforms do not clip.
class AudioClip {
public:
    AudioClip() = default;
    // Throws InputError when empty, non-finite or sample_rate == 0.
    AudioClip(std::vector<double> samples, std::uint32_t sample_rate);

    std::span<const double> samples() const noexcept { return samples_; }
    std::vector<double>& mutable_samples() noexcept { return samples_; }
    std::uint32_t sample_rate() const noexcept { return sample_rate_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    double duration_seconds() const noexcept {
        return sample_rate_ ? static_cast<double>(samples_.size()) / sample_rate_ : 0.0;
    }

    friend bool operator==(const AudioClip&, const AudioClip&) = default;

private:
    std::vector<double> samples_;
    std::uint32_t sample_rate_ = 0;
};

double rms(std::span<const double> x);
double mean_power(std::span<const double> x);
double peak_abs(std::span<const double> x);

}  // namespace pvvasm
