#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pvvasm/audio_clip.hpp"

namespace pvvasm::fixtures {

// Directory removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

AudioClip tone(double freq_hz, double seconds, double amplitude = 0.5, std::uint32_t rate = 16000);
// Sum of two tones.
AudioClip two_tone(double f1, double f2, double seconds, double a1, double a2, std::uint32_t rate = 16000);
AudioClip white_noise(std::size_t samples, double sigma, std::uint64_t seed, std::uint32_t rate = 16000);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

struct CommandResult {
    int exit_code = -1;
    std::string output;
};

// Runs a shell command, capturing stdout and stderr together.
CommandResult run_command(const std::string& command);

// Writes `count` two-tone clips plus a `<path>\t<label>` manifest into dir.
// Low-centroid clips are labeled bonafide, high-centroid ones spoof.
std::string write_two_tone_dataset(const std::filesystem::path& dir, std::size_t count);

}  // namespace pvvasm::fixtures
