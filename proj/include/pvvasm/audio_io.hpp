#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "pvvasm/audio_clip.hpp"

namespace pvvasm {

struct ClipSource {
    std::string path;
    std::optional<std::uint32_t> expected_rate;
};

// RIFF/WAVE, PCM 16-bit or IEEE float 32-bit, mono or stereo (averaged).
// PCM is scaled by 1/32768. Resamples when expected_rate differs.
AudioClip load_wav(const ClipSource& source);

// Writes 32-bit float mono WAV. With clip_to_unit, samples are clamped to [-1, 1].
void save_wav(const AudioClip& clip, const std::string& path, bool clip_to_unit = false);

}  // namespace pvvasm
