#include "pvvasm/audio_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "pvvasm/dsp.hpp"
#include "pvvasm/errors.hpp"

namespace pvvasm {
namespace {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T read_le(const std::vector<char>& buf, std::size_t pos) {
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    return v;
}

template <typename T>
void write_le(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

AudioClip load_wav(const ClipSource& source) {
    std::ifstream in(source.path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + source.path);
    const std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto fail = [&](const std::string& why) { return FormatError(source.path + ": " + why); };

    if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
        throw fail("not a RIFF/WAVE file");
    }

    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t rate = 0;
    std::uint16_t bits = 0;
    const char* data = nullptr;
    std::size_t data_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= buf.size()) {
        const std::string id(buf.data() + pos, 4);
        const auto size = read_le<std::uint32_t>(buf, pos + 4);
        const std::size_t body = pos + 8;
        const std::size_t avail = std::min<std::size_t>(size, buf.size() - body);
        if (id == "fmt ") {
            if (avail < 16) throw fail("truncated fmt chunk");
            format = read_le<std::uint16_t>(buf, body);
            channels = read_le<std::uint16_t>(buf, body + 2);
            rate = read_le<std::uint32_t>(buf, body + 4);
            bits = read_le<std::uint16_t>(buf, body + 14);
            if (format == kFormatExtensible) {
                if (avail < 26) throw fail("truncated extensible fmt chunk");
                format = read_le<std::uint16_t>(buf, body + 24);
            }
        } else if (id == "data") {
            data = buf.data() + body;
            data_size = avail;
        }
        pos = body + size + (size & 1U);
    }

    if (format == 0) throw fail("missing fmt chunk");
    if (!data) throw fail("missing data chunk");
    if (channels != 1 && channels != 2) throw fail("unsupported channel count " + std::to_string(channels));
    if (rate == 0) throw fail("zero sample rate");
    const bool pcm16 = format == kFormatPcm && bits == 16;
    const bool float32 = format == kFormatFloat && bits == 32;
    if (!pcm16 && !float32) {
        throw fail("unsupported codec (format " + std::to_string(format) + ", " + std::to_string(bits) + " bits)");
    }

    const std::size_t frame_bytes = static_cast<std::size_t>(bits / 8) * channels;
    const std::size_t frames = data_size / frame_bytes;
    if (frames == 0) throw fail("zero-length audio");

    std::vector<double> samples(frames);
    for (std::size_t f = 0; f < frames; ++f) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
            const char* p = data + f * frame_bytes + c * (bits / 8);
            if (pcm16) {
                std::int16_t v;
                std::memcpy(&v, p, 2);
                acc += static_cast<double>(v) / 32768.0;
            } else {
                float v;
                std::memcpy(&v, p, 4);
                acc += static_cast<double>(v);
            }
        }
        samples[f] = channels == 1 ? acc : acc / channels;
    }

    if (source.expected_rate && *source.expected_rate != rate) {
        samples = dsp::resample_sinc(samples, rate, *source.expected_rate);
        rate = *source.expected_rate;
        if (samples.empty()) throw fail("resampling produced no samples");
    }
    try {
        return AudioClip(std::move(samples), rate);
    } catch (const InputError& e) {
        throw fail(e.what());
    }
}

void save_wav(const AudioClip& clip, const std::string& path, bool clip_to_unit) {
    if (clip.empty() || clip.sample_rate() == 0) throw InputError("cannot save an empty clip to " + path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path + " for writing");

    const auto data_bytes = static_cast<std::uint32_t>(clip.size() * 4);
    out.write("RIFF", 4);
    write_le<std::uint32_t>(out, 36 + data_bytes);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    write_le<std::uint32_t>(out, 16);
    write_le<std::uint16_t>(out, kFormatFloat);
    write_le<std::uint16_t>(out, 1);
    write_le<std::uint32_t>(out, clip.sample_rate());
    write_le<std::uint32_t>(out, clip.sample_rate() * 4);
    write_le<std::uint16_t>(out, 4);
    write_le<std::uint16_t>(out, 32);
    out.write("data", 4);
    write_le<std::uint32_t>(out, data_bytes);
    for (double v : clip.samples()) {
        if (clip_to_unit) v = std::clamp(v, -1.0, 1.0);
        write_le<float>(out, static_cast<float>(v));
    }
    if (!out) throw Error("write failed for " + path);
}

}  // namespace pvvasm
