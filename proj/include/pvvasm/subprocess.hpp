#pragma once

#include <functional>
#include <string>
#include <sys/types.h>
#include <vector>

namespace pvvasm {

// Child process with piped stdin/stdout; stderr is inherited.
class Subprocess {
public:
    explicit Subprocess(const std::vector<std::string>& argv);
    ~Subprocess();

    Subprocess(const Subprocess&) = delete;
    Subprocess& operator=(const Subprocess&) = delete;

    // Writes `input` while delivering every complete stdout line to `on_line`
    // until all input is written and `on_line` returns true. Throws ScorerError
    // when no progress happens for `idle_timeout_ms` or the child closes stdout.
    void exchange(const std::string& input, const std::function<bool(const std::string&)>& on_line,
                  int idle_timeout_ms);

    // Closes stdin and reaps the child, killing it after `grace_ms`.
    int close(int grace_ms = 2000);

    pid_t pid() const noexcept { return pid_; }

private:
    pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string pending_;
    bool reaped_ = false;
    int status_ = 0;
};

}  // namespace pvvasm
