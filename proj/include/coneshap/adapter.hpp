#pragma once

#include <atomic>
#include <csignal>
#include <cstdint>
#include <cstring>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "coneshap/errors.hpp"
#include "coneshap/models.hpp"

namespace coneshap {

// External-model escape hatch: a child process speaking newline-delimited
// JSON on stdio.
//   request:  {"id": 7, "image": {"h": 4, "w": 4, "rgb_b64": "..."}}
//   response: {"id": 7, "logits": [0.1, 0.9]}
// One request in flight per process; a small pool gives parallelism.

namespace detail {

inline std::string base64_encode(const std::uint8_t* data, std::size_t len) {
    static const char* table = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (std::size_t i = 0; i < len; i += 3) {
        const std::uint32_t b0 = data[i];
        const std::uint32_t b1 = i + 1 < len ? data[i + 1] : 0;
        const std::uint32_t b2 = i + 2 < len ? data[i + 2] : 0;
        const std::uint32_t triple = (b0 << 16) | (b1 << 8) | b2;
        out.push_back(table[(triple >> 18) & 0x3f]);
        out.push_back(table[(triple >> 12) & 0x3f]);
        out.push_back(i + 1 < len ? table[(triple >> 6) & 0x3f] : '=');
        out.push_back(i + 2 < len ? table[triple & 0x3f] : '=');
    }
    return out;
}

inline void ignore_sigpipe_once() {
    static std::once_flag flag;
    std::call_once(flag, []() { std::signal(SIGPIPE, SIG_IGN); });
}

} // namespace detail

class AdapterProcess {
public:
    explicit AdapterProcess(const std::vector<std::string>& command) {
        if (command.empty()) throw PreconditionError("adapter command is empty");
        detail::ignore_sigpipe_once();
        int to_child[2];
        int from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0)
            throw TransportError("cannot create adapter pipes");
        pid_ = fork();
        if (pid_ < 0) throw TransportError("fork failed");
        if (pid_ == 0) {
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]);
            close(to_child[1]);
            close(from_child[0]);
            close(from_child[1]);
            std::vector<char*> argv;
            for (const auto& arg : command) argv.push_back(const_cast<char*>(arg.c_str()));
            argv.push_back(nullptr);
            execvp(argv[0], argv.data());
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        in_fd_ = to_child[1];
        out_fd_ = from_child[0];
    }

    AdapterProcess(const AdapterProcess&) = delete;
    AdapterProcess& operator=(const AdapterProcess&) = delete;

    ~AdapterProcess() {
        if (in_fd_ >= 0) close(in_fd_);
        if (out_fd_ >= 0) close(out_fd_);
        if (pid_ > 0) {
            int status = 0;
            if (waitpid(pid_, &status, WNOHANG) == 0) {
                kill(pid_, SIGKILL);
                waitpid(pid_, &status, 0);
            }
        }
    }

    nlohmann::json request(const nlohmann::json& payload, int timeout_ms) {
        std::lock_guard<std::mutex> lock(mu_);
        const std::string line = payload.dump() + "\n";
        write_all(line);
        const std::string response = read_line(timeout_ms);
        try {
            return nlohmann::json::parse(response);
        } catch (const nlohmann::json::exception& e) {
            throw ProtocolError(std::string("adapter sent malformed JSON: ") + e.what());
        }
    }

private:
    void write_all(const std::string& data) {
        std::size_t off = 0;
        while (off < data.size()) {
            const ssize_t n = write(in_fd_, data.data() + off, data.size() - off);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw TransportError("adapter pipe write failed (process gone?)");
            }
            off += static_cast<std::size_t>(n);
        }
    }

    std::string read_line(int timeout_ms) {
        for (;;) {
            const auto newline = buffer_.find('\n');
            if (newline != std::string::npos) {
                std::string line = buffer_.substr(0, newline);
                buffer_.erase(0, newline + 1);
                return line;
            }
            pollfd pfd{out_fd_, POLLIN, 0};
            const int ready = poll(&pfd, 1, timeout_ms);
            if (ready == 0) throw TransportError("adapter response timed out");
            if (ready < 0) {
                if (errno == EINTR) continue;
                throw TransportError("poll on adapter pipe failed");
            }
            char chunk[4096];
            const ssize_t n = read(out_fd_, chunk, sizeof(chunk));
            if (n == 0) throw TransportError("adapter process closed its pipe");
            if (n < 0) {
                if (errno == EINTR) continue;
                throw TransportError("adapter pipe read failed");
            }
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    pid_t pid_ = -1;
    int in_fd_ = -1;
    int out_fd_ = -1;
    std::string buffer_;
    std::mutex mu_;
};

class AdapterModel : public Model {
public:
    AdapterModel(std::vector<std::string> command, int class_count, int timeout_ms = 10000,
                 int pool = 1)
        : command_(std::move(command)), class_count_(class_count), timeout_ms_(timeout_ms) {
        if (class_count_ < 2) throw FormatError("adapter model needs class_count >= 2");
        if (pool < 1) pool = 1;
        for (int i = 0; i < pool; ++i)
            processes_.push_back(std::make_unique<AdapterProcess>(command_));
    }

    std::string kind() const override { return "adapter"; }
    int class_count() const override { return class_count_; }
    int input_size() const override { return 0; }

    Prediction predict(const Image& image) const override {
        const std::uint64_t id = next_id_.fetch_add(1);
        nlohmann::json req;
        req["id"] = id;
        req["image"] = {
            {"h", image.height},
            {"w", image.width},
            {"rgb_b64", detail::base64_encode(image.rgb.data(), image.rgb.size())},
        };
        auto& process = *processes_[id % processes_.size()];
        const nlohmann::json resp = process.request(req, timeout_ms_);
        if (!resp.contains("id") || !resp["id"].is_number_unsigned() ||
            resp["id"].get<std::uint64_t>() != id)
            throw ProtocolError("adapter response id does not match the request");
        if (!resp.contains("logits") || !resp["logits"].is_array())
            throw ProtocolError("adapter response has no logits array");
        Prediction out;
        out.logits = resp["logits"].get<std::vector<double>>();
        if (out.logits.size() != static_cast<std::size_t>(class_count_))
            throw ProtocolError("adapter returned " + std::to_string(out.logits.size()) +
                                " logits, expected " + std::to_string(class_count_));
        for (double v : out.logits)
            if (!std::isfinite(v)) throw ProtocolError("adapter returned non-finite logits");
        return out;
    }

private:
    std::vector<std::string> command_;
    int class_count_;
    int timeout_ms_;
    std::vector<std::unique_ptr<AdapterProcess>> processes_;
    mutable std::atomic<std::uint64_t> next_id_{1};
};

} // namespace coneshap
