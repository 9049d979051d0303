#include "fixtures.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <sys/wait.h>

#include "pvvasm/audio_io.hpp"

namespace fs = std::filesystem;

namespace pvvasm::fixtures {

TempDir::TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "pvvasm-test-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

AudioClip tone(double freq_hz, double seconds, double amplitude, std::uint32_t rate) {
    return two_tone(freq_hz, freq_hz, seconds, amplitude, 0.0, rate);
}

AudioClip two_tone(double f1, double f2, double seconds, double a1, double a2, std::uint32_t rate) {
    const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        s[i] = a1 * std::sin(2.0 * std::numbers::pi * f1 * t) + a2 * std::sin(2.0 * std::numbers::pi * f2 * t);
    }
    return AudioClip(std::move(s), rate);
}

AudioClip white_noise(std::size_t samples, double sigma, std::uint64_t seed, std::uint32_t rate) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, sigma);
    std::vector<double> s(samples);
    for (auto& v : s) v = d(rng);
    return AudioClip(std::move(s), rate);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

CommandResult run_command(const std::string& command) {
    CommandResult r;
    FILE* pipe = ::popen((command + " 2>&1").c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t got;
    while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), got);
    const int status = ::pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string write_two_tone_dataset(const fs::path& dir, std::size_t count) {
    fs::create_directories(dir);
    std::ostringstream manifest;
    std::mt19937_64 rng(20240);
    std::uniform_real_distribution<double> jitter(0.0, 1.0);
    for (std::size_t i = 0; i < count; ++i) {
        const bool bonafide = i % 2 == 0;
        // Bona fide items keep their energy below the LPF band; spoof items
        // carry a strong 5 kHz component.
        const double f1 = 300.0 + 400.0 * jitter(rng);
        const double f2 = bonafide ? 1200.0 + 600.0 * jitter(rng) : 5000.0 + 1000.0 * jitter(rng);
        const double a2 = bonafide ? 0.1 + 0.1 * jitter(rng) : 0.3 + 0.2 * jitter(rng);
        const std::string name = "item" + std::to_string(i) + ".wav";
        save_wav(two_tone(f1, f2, 0.5, 0.3, a2), (dir / name).string());
        manifest << name << '\t' << (bonafide ? "bonafide" : "spoof") << '\n';
    }
    const std::string path = (dir / "dataset.tsv").string();
    write_text(path, manifest.str());
    return path;
}

}  // namespace pvvasm::fixtures
