#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pvvasm/scorer.hpp"

namespace pvvasm {

class Subprocess;

// Newline-delimited wire records shared by the bridge client and the
// reference echo bridge.
namespace wire {

std::string base64_encode(std::span<const std::uint8_t> bytes);
// Throws InputError on malformed input.
std::vector<std::uint8_t> base64_decode(const std::string& text);

// Little-endian float32 PCM, base64 encoded.
std::string encode_pcm(std::span<const double> samples);
std::vector<float> decode_pcm(const std::string& b64);

constexpr const char* kHello = "{\"hello\": 1}";

std::string format_request(std::uint64_t id, std::uint32_t sample_rate, std::span<const double> samples);
std::string format_hello_reply(const std::string& name);
std::string format_response(std::uint64_t id, double p_spoof, double p_bonafide);
std::string format_error(std::optional<std::uint64_t> id, const std::string& message);

}  // namespace wire

struct BridgeConfig {
    std::vector<std::string> command;
    int timeout_ms = 30000;
};

// Scores through an external process speaking the wire protocol. The
// handshake runs in the constructor. Not safe for concurrent use.
class BridgeScorer final : public Scorer {
public:
    explicit BridgeScorer(BridgeConfig config);
    ~BridgeScorer() override;

    ScoreResult score(const AudioClip& clip) override;
    std::vector<ScoreResult> score_batch(std::span<const AudioClip> clips) override;
    std::string name() const override;
    const std::string& model_name() const noexcept { return model_name_; }

private:
    BridgeConfig config_;
    std::unique_ptr<Subprocess> child_;
    std::string model_name_;
    std::uint64_t next_id_ = 1;
};

}  // namespace pvvasm
