#include "pvvasm/bridge.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <json.hpp>
#include <unordered_map>

#include "pvvasm/errors.hpp"
#include "pvvasm/subprocess.hpp"

namespace pvvasm {
namespace wire {
namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

std::string number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += kAlphabet[v & 63];
    }
    if (i + 1 == bytes.size()) {
        const std::uint32_t v = bytes[i] << 16;
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += "==";
    } else if (i + 2 == bytes.size()) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    if (text.size() % 4 != 0) throw InputError("base64 length is not a multiple of 4");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int v[4];
        int pad = 0;
        for (int j = 0; j < 4; ++j) {
            const char c = text[i + j];
            if (c == '=' && i + 4 == text.size() && j >= 2) {
                v[j] = 0;
                ++pad;
            } else {
                if (pad > 0) throw InputError("base64 padding in the middle of a quantum");
                v[j] = decode_char(c);
                if (v[j] < 0) throw InputError("invalid base64 character");
            }
        }
        const std::uint32_t q = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
        out.push_back(static_cast<std::uint8_t>(q >> 16));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>(q >> 8));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(q));
    }
    return out;
}

std::string encode_pcm(std::span<const double> samples) {
    std::vector<std::uint8_t> bytes(samples.size() * 4);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto f = static_cast<float>(samples[i]);
        std::memcpy(bytes.data() + 4 * i, &f, 4);
    }
    return base64_encode(bytes);
}

std::vector<float> decode_pcm(const std::string& b64) {
    const std::vector<std::uint8_t> bytes = base64_decode(b64);
    if (bytes.size() % 4 != 0) throw InputError("PCM payload is not a whole number of float32 samples");
    std::vector<float> out(bytes.size() / 4);
    std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

std::string format_request(std::uint64_t id, std::uint32_t sample_rate, std::span<const double> samples) {
    return "{\"id\": " + std::to_string(id) + ", \"sr\": " + std::to_string(sample_rate) + ", \"pcm_b64\": \"" +
           encode_pcm(samples) + "\"}";
}

std::string format_hello_reply(const std::string& name) {
    return "{\"hello\": 1, \"name\": " + nlohmann::json(name).dump() + "}";
}

std::string format_response(std::uint64_t id, double p_spoof, double p_bonafide) {
    return "{\"id\": " + std::to_string(id) + ", \"p_spoof\": " + number(p_spoof) +
           ", \"p_bonafide\": " + number(p_bonafide) + "}";
}

std::string format_error(std::optional<std::uint64_t> id, const std::string& message) {
    const std::string id_text = id ? std::to_string(*id) : "null";
    return "{\"id\": " + id_text + ", \"error\": " + nlohmann::json(message).dump() + "}";
}

}  // namespace wire

// ---------------------------------------------------------------------------
// BridgeScorer

BridgeScorer::BridgeScorer(BridgeConfig config) : config_(std::move(config)) {
    if (config_.command.empty()) throw ConfigError("bridge scorer needs a command");
    if (config_.timeout_ms <= 0) throw ConfigError("bridge timeout must be positive");
    child_ = std::make_unique<Subprocess>(config_.command);

    std::string reply;
    child_->exchange(std::string(wire::kHello) + "\n",
                     [&](const std::string& line) {
                         reply = line;
                         return true;
                     },
                     config_.timeout_ms);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(reply);
    } catch (const nlohmann::json::exception&) {
        throw ScorerError("bridge handshake reply is not JSON", reply);
    }
    if (!j.is_object() || !j.contains("hello") || j["hello"] != 1 || !j.contains("name") || !j["name"].is_string()) {
        throw ScorerError("bridge handshake reply lacks {\"hello\": 1, \"name\": ...}", reply);
    }
    model_name_ = j["name"].get<std::string>();
}

BridgeScorer::~BridgeScorer() = default;

std::string BridgeScorer::name() const { return "bridge:" + model_name_; }

ScoreResult BridgeScorer::score(const AudioClip& clip) {
    return score_batch(std::span<const AudioClip>(&clip, 1)).front();
}

std::vector<ScoreResult> BridgeScorer::score_batch(std::span<const AudioClip> clips) {
    if (clips.empty()) return {};
    const std::uint64_t first_id = next_id_;
    next_id_ += clips.size();

    std::string payload;
    for (std::size_t i = 0; i < clips.size(); ++i) {
        payload += wire::format_request(first_id + i, clips[i].sample_rate(), clips[i].samples());
        payload += '\n';
    }

    std::vector<std::optional<ScoreResult>> results(clips.size());
    std::size_t received = 0;
    child_->exchange(
        payload,
        [&](const std::string& line) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception&) {
                throw ScorerError("malformed bridge record", line);
            }
            if (!j.is_object() || !j.contains("id")) throw ScorerError("bridge record without id", line);
            if (j.contains("error")) {
                const std::string msg = j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump();
                throw ScorerError("bridge reported an error: " + msg, line);
            }
            if (!j["id"].is_number_unsigned()) throw ScorerError("bridge record id is not an unsigned integer", line);
            const auto id = j["id"].get<std::uint64_t>();
            if (id < first_id || id >= first_id + clips.size()) throw ScorerError("bridge answered unknown id", line);
            auto& slot = results[id - first_id];
            if (slot) throw ScorerError("bridge answered id twice", line);
            if (!j.contains("p_spoof") || !j.contains("p_bonafide") || !j["p_spoof"].is_number() ||
                !j["p_bonafide"].is_number()) {
                throw ScorerError("bridge response lacks numeric p_spoof/p_bonafide", line);
            }
            try {
                slot = make_score(j["p_spoof"].get<double>(), j["p_bonafide"].get<double>());
            } catch (const ScorerError& e) {
                throw ScorerError(e.what(), line);
            }
            return ++received == clips.size();
        },
        config_.timeout_ms);

    std::vector<ScoreResult> out;
    out.reserve(clips.size());
    for (auto& r : results) out.push_back(*r);
    return out;
}

}  // namespace pvvasm
