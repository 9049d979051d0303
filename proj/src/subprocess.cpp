#include "pvvasm/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

#include "pvvasm/errors.hpp"

namespace pvvasm {
namespace {

void ignore_sigpipe_once() {
    static const bool done = [] {
        ::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)done;
}

void set_nonblocking(int fd) {
    const int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

}  // namespace

Subprocess::Subprocess(const std::vector<std::string>& argv) {
    if (argv.empty()) throw ConfigError("bridge command is empty");
    ignore_sigpipe_once();
    int in_pipe[2];
    int out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw ScorerError("pipe failed: " + std::string(std::strerror(errno)));
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        throw ScorerError("pipe failed: " + std::string(std::strerror(errno)));
    }

    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    pid_ = ::fork();
    if (pid_ < 0) throw ScorerError("fork failed: " + std::string(std::strerror(errno)));
    if (pid_ == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::execvp(args[0], args.data());
        ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    set_nonblocking(to_child_);
    set_nonblocking(from_child_);
}

Subprocess::~Subprocess() {
    try {
        close(500);
    } catch (...) {
    }
}

void Subprocess::exchange(const std::string& input, const std::function<bool(const std::string&)>& on_line,
                          int idle_timeout_ms) {
    std::size_t written = 0;
    bool done = false;

    auto drain_pending = [&] {
        std::size_t nl;
        while (!done && (nl = pending_.find('\n')) != std::string::npos) {
            std::string line = pending_.substr(0, nl);
            pending_.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            done = on_line(line);
        }
    };
    drain_pending();

    char buf[65536];
    while (written < input.size() || !done) {
        if (from_child_ < 0) throw ScorerError("bridge process closed its output");
        pollfd fds[2];
        nfds_t count = 0;
        fds[count++] = pollfd{from_child_, POLLIN, 0};
        const bool want_write = written < input.size() && to_child_ >= 0;
        if (want_write) fds[count++] = pollfd{to_child_, POLLOUT, 0};

        const int ready = ::poll(fds, count, idle_timeout_ms);
        if (ready < 0) {
            if (errno == EINTR) continue;
            throw ScorerError("poll failed: " + std::string(std::strerror(errno)));
        }
        if (ready == 0) {
            throw ScorerError("bridge timed out after " + std::to_string(idle_timeout_ms) + " ms without progress",
                              pending_);
        }
        if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
            const ssize_t got = ::read(from_child_, buf, sizeof buf);
            if (got > 0) {
                pending_.append(buf, static_cast<std::size_t>(got));
                drain_pending();
            } else if (got == 0) {
                ::close(from_child_);
                from_child_ = -1;
                if (!done) throw ScorerError("bridge process exited or closed its output", pending_);
            } else if (errno != EAGAIN && errno != EINTR) {
                throw ScorerError("read from bridge failed: " + std::string(std::strerror(errno)));
            }
        }
        if (want_write && (fds[count - 1].revents & (POLLOUT | POLLERR | POLLHUP))) {
            const ssize_t put = ::write(to_child_, input.data() + written, input.size() - written);
            if (put > 0) {
                written += static_cast<std::size_t>(put);
            } else if (put < 0 && errno != EAGAIN && errno != EINTR) {
                throw ScorerError("write to bridge failed: " + std::string(std::strerror(errno)));
            }
        }
    }
}

int Subprocess::close(int grace_ms) {
    if (to_child_ >= 0) {
        ::close(to_child_);
        to_child_ = -1;
    }
    if (from_child_ >= 0) {
        ::close(from_child_);
        from_child_ = -1;
    }
    if (pid_ > 0 && !reaped_) {
        const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(grace_ms);
        for (;;) {
            const pid_t r = ::waitpid(pid_, &status_, WNOHANG);
            if (r == pid_ || r < 0) break;
            if (std::chrono::steady_clock::now() >= deadline) {
                ::kill(pid_, SIGKILL);
                ::waitpid(pid_, &status_, 0);
                break;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
        }
        reaped_ = true;
    }
    return status_;
}

}  // namespace pvvasm
