// Reference scorer bridge speaking the newline-delimited wire protocol.
//
//   echo mode:     p_bonafide = clamp(mean |pcm|, 0, 1)
//   constant mode: p_bonafide = --p-bonafide
//
// Fault switches exist so the client's error paths can be exercised.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <optional>
#include <poll.h>
#include <string>
#include <unistd.h>
#include <vector>

#include "pvvasm/bridge.hpp"

using nlohmann::json;
namespace wire = pvvasm::wire;

namespace {

struct Options {
    std::string mode = "echo";
    double p_bonafide = 0.8;
    std::string name = "echo";
    bool reverse = false;
    bool bad_hello = false;
    bool bad_sum = false;
    long long error_id = -1;
    long long drop_id = -1;
    long long duplicate_id = -1;
    long long garbage_after = -1;
};

void emit(const std::string& line) {
    std::string out = line + "\n";
    std::size_t off = 0;
    while (off < out.size()) {
        const ssize_t w = ::write(STDOUT_FILENO, out.data() + off, out.size() - off);
        if (w <= 0) std::_Exit(1);
        off += static_cast<std::size_t>(w);
    }
}

class Server {
public:
    explicit Server(Options opt) : opt_(std::move(opt)) {}

    void handle(const std::string& line) {
        if (!greeted_) {
            greeted_ = true;
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object() || j.value("hello", 0) != 1) {
                emit(wire::format_error(std::nullopt, "expected hello"));
                return;
            }
            emit(opt_.bad_hello ? std::string("{\"hello\": 2}") : wire::format_hello_reply(opt_.name));
            return;
        }
        queue(respond(line));
    }

    void flush() {
        if (opt_.reverse) std::reverse(pending_.begin(), pending_.end());
        for (const auto& r : pending_) {
            emit(r);
            ++sent_;
            if (opt_.garbage_after >= 0 && sent_ == static_cast<unsigned long long>(opt_.garbage_after)) {
                emit("this is not json");
            }
        }
        pending_.clear();
    }

private:
    void queue(std::optional<std::string> r) {
        if (!r) return;
        pending_.push_back(std::move(*r));
        if (!opt_.reverse) flush();
    }

    std::optional<std::string> respond(const std::string& line) {
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) return wire::format_error(std::nullopt, "request is not a JSON object");
        std::optional<std::uint64_t> id;
        if (j.contains("id") && j["id"].is_number_unsigned()) id = j["id"].get<std::uint64_t>();
        if (!id) return wire::format_error(std::nullopt, "request lacks an unsigned id");
        if (!j.contains("sr") || !j["sr"].is_number_unsigned() || j["sr"].get<std::uint64_t>() == 0) {
            return wire::format_error(id, "request lacks a positive sr");
        }
        if (!j.contains("pcm_b64") || !j["pcm_b64"].is_string()) return wire::format_error(id, "request lacks pcm_b64");
        std::vector<float> pcm;
        try {
            pcm = wire::decode_pcm(j["pcm_b64"].get<std::string>());
        } catch (const std::exception& e) {
            return wire::format_error(id, e.what());
        }
        if (pcm.empty()) return wire::format_error(id, "empty pcm");

        const auto raw = static_cast<long long>(*id);
        if (raw == opt_.error_id) return wire::format_error(id, "injected failure");
        if (raw == opt_.drop_id) return std::nullopt;

        double pb = opt_.p_bonafide;
        if (opt_.mode == "echo") {
            double sum = 0.0;
            for (float v : pcm) sum += std::abs(static_cast<double>(v));
            pb = std::clamp(sum / static_cast<double>(pcm.size()), 0.0, 1.0);
        }
        const double ps = opt_.bad_sum ? 1.1 - pb : 1.0 - pb;
        std::string r = wire::format_response(*id, ps, pb);
        if (raw == opt_.duplicate_id) pending_.push_back(r);
        return r;
    }

    Options opt_;
    bool greeted_ = false;
    std::vector<std::string> pending_;
    unsigned long long sent_ = 0;
};

}  // namespace

int main(int argc, char** argv) {
    Options opt;
    CLI::App app{"Reference bridge for the scorer wire protocol"};
    app.add_option("--mode", opt.mode, "echo or constant")->check(CLI::IsMember({"echo", "constant"}));
    app.add_option("--p-bonafide", opt.p_bonafide, "Constant-mode p_bonafide")->check(CLI::Range(0.0, 1.0));
    app.add_option("--name", opt.name, "Model name announced in the handshake");
    app.add_flag("--reverse", opt.reverse, "Answer each burst of requests in reverse order");
    app.add_flag("--bad-hello", opt.bad_hello, "Send a malformed handshake reply");
    app.add_flag("--bad-sum", opt.bad_sum, "Answer with probabilities summing to 1.1");
    app.add_option("--error-id", opt.error_id, "Answer this id with an error record");
    app.add_option("--drop-id", opt.drop_id, "Never answer this id");
    app.add_option("--duplicate-id", opt.duplicate_id, "Answer this id twice");
    app.add_option("--garbage-after", opt.garbage_after, "Emit a non-JSON line after this many responses");
    CLI11_PARSE(app, argc, argv);

    Server server(opt);
    std::string buf;
    char chunk[65536];
    for (;;) {
        // A short idle period ends a burst; reverse mode answers it then.
        pollfd pfd{STDIN_FILENO, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, 20);
        if (ready == 0) {
            server.flush();
            continue;
        }
        const ssize_t r = ::read(STDIN_FILENO, chunk, sizeof chunk);
        if (r <= 0) break;
        buf.append(chunk, static_cast<std::size_t>(r));
        std::size_t start = 0;
        for (std::size_t nl; (nl = buf.find('\n', start)) != std::string::npos; start = nl + 1) {
            server.handle(buf.substr(start, nl - start));
        }
        buf.erase(0, start);
    }
    server.flush();
    return 0;
}
