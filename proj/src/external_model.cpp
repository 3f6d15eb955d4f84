#include "canouq/external_model.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstring>
#include <thread>

#include "canouq/error.hpp"

extern char** environ;

namespace canouq {

namespace {

constexpr std::size_t kWindow = 64;

void ignore_sigpipe() {
    static std::once_flag once;
    std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

std::vector<double> row_of(std::span<const double> points, std::size_t i, std::size_t dim) {
    auto r = points.subspan(i * dim, dim);
    return {r.begin(), r.end()};
}

}  // namespace

class ExternalCommandModel::Child {
public:
    explicit Child(const std::vector<std::string>& argv) {
        int in_pipe[2];
        int out_pipe[2];
        if (::pipe(in_pipe) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));
        if (::pipe(out_pipe) != 0) {
            ::close(in_pipe[0]);
            ::close(in_pipe[1]);
            throw Error(std::string("pipe: ") + std::strerror(errno));
        }
        ::fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
        ::fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);

        posix_spawn_file_actions_t actions;
        posix_spawn_file_actions_init(&actions);
        posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
        posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
        posix_spawn_file_actions_addclose(&actions, in_pipe[0]);
        posix_spawn_file_actions_addclose(&actions, out_pipe[1]);

        std::vector<char*> args;
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        const int rc = ::posix_spawnp(&pid_, args[0], &actions, nullptr, args.data(), environ);
        posix_spawn_file_actions_destroy(&actions);
        ::close(in_pipe[0]);
        ::close(out_pipe[1]);
        if (rc != 0) {
            ::close(in_pipe[1]);
            ::close(out_pipe[0]);
            throw Error("cannot start model command '" + argv[0] + "': " + std::strerror(rc));
        }
        to_child_ = in_pipe[1];
        from_child_ = out_pipe[0];
    }

    ~Child() {
        if (to_child_ >= 0) ::close(to_child_);
        if (from_child_ >= 0) ::close(from_child_);
        if (pid_ > 0 && !reaped_) {
            for (int i = 0; i < 100; ++i) {
                if (::waitpid(pid_, nullptr, WNOHANG) == pid_) return;
                std::this_thread::sleep_for(std::chrono::milliseconds(10));
            }
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, nullptr, 0);
        }
    }

    Child(const Child&) = delete;
    Child& operator=(const Child&) = delete;

    bool broken() const noexcept { return broken_; }

    void evaluate(std::span<const double> points, std::span<double> out, std::size_t dim) {
        for (std::size_t start = 0; start < out.size(); start += kWindow) {
            const std::size_t end = std::min(out.size(), start + kWindow);
            std::string request;
            char buf[32];
            for (std::size_t i = start; i < end; ++i) {
                for (std::size_t j = 0; j < dim; ++j) {
                    if (j) request += ' ';
                    auto res = std::to_chars(buf, buf + sizeof(buf), points[i * dim + j]);
                    request.append(buf, res.ptr);
                }
                request += '\n';
            }
            write_all(request, row_of(points, start, dim));
            for (std::size_t i = start; i < end; ++i) out[i] = read_value(row_of(points, i, dim));
        }
    }

private:
    [[noreturn]] void fail(std::vector<double> point, const std::string& reason) {
        broken_ = true;
        std::string status;
        if (pid_ > 0) {
            int ws = 0;
            if (::waitpid(pid_, &ws, WNOHANG) == pid_) {
                reaped_ = true;
                if (WIFEXITED(ws)) status = "; exit status " + std::to_string(WEXITSTATUS(ws));
                else if (WIFSIGNALED(ws)) status = "; killed by signal " + std::to_string(WTERMSIG(ws));
            }
        }
        throw ModelEvaluationFailure(std::move(point), reason + status);
    }

    void write_all(const std::string& data, std::vector<double> point) {
        std::size_t written = 0;
        while (written < data.size()) {
            const ssize_t n = ::write(to_child_, data.data() + written, data.size() - written);
            if (n < 0) {
                if (errno == EINTR) continue;
                fail(std::move(point), std::string("write to model command failed: ") + std::strerror(errno));
            }
            written += static_cast<std::size_t>(n);
        }
    }

    double read_value(std::vector<double> point) {
        std::string line;
        for (;;) {
            const auto nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                break;
            }
            char chunk[4096];
            const ssize_t n = ::read(from_child_, chunk, sizeof(chunk));
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) {
                // Give the child a moment to exit so its status can be reported.
                std::this_thread::sleep_for(std::chrono::milliseconds(20));
                fail(std::move(point), "model command closed its output");
            }
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
        const char* first = line.data();
        const char* last = line.data() + line.size();
        while (first < last && std::isspace(static_cast<unsigned char>(*first))) ++first;
        while (last > first && std::isspace(static_cast<unsigned char>(last[-1]))) --last;
        double value = 0;
        auto res = std::from_chars(first, last, value);
        if (first == last || res.ec != std::errc() || res.ptr != last)
            fail(std::move(point), "malformed model output '" + line + "'");
        return value;
    }

    pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    bool broken_ = false;
    bool reaped_ = false;
    std::string buffer_;
};

ExternalCommandModel::ExternalCommandModel(std::vector<std::string> argv, std::size_t dimension,
                                           bool concurrent, std::size_t pool_size)
    : argv_(std::move(argv)), dimension_(dimension), pool_size_(concurrent ? std::max<std::size_t>(1, pool_size) : 1) {
    if (argv_.empty()) throw InvalidArgument("ExternalCommandModel: empty command");
    if (dimension_ == 0) throw InvalidArgument("ExternalCommandModel: dimension must be positive");
    ignore_sigpipe();
}

ExternalCommandModel::~ExternalCommandModel() = default;

std::string ExternalCommandModel::name() const { return "command:" + argv_.front(); }

void ExternalCommandModel::evaluate_batch(std::span<const double> points, std::span<double> out) const {
    std::unique_ptr<Child> child;
    {
        std::unique_lock lock(mutex_);
        available_.wait(lock, [&] { return !idle_.empty() || spawned_ < pool_size_; });
        if (!idle_.empty()) {
            child = std::move(idle_.back());
            idle_.pop_back();
        } else {
            ++spawned_;
        }
    }
    auto release = [&](std::unique_ptr<Child> c) {
        std::lock_guard lock(mutex_);
        if (c && !c->broken()) idle_.push_back(std::move(c));
        else --spawned_;
        available_.notify_one();
    };
    try {
        if (!child) child = std::make_unique<Child>(argv_);
        child->evaluate(points, out, dimension_);
    } catch (...) {
        release(std::move(child));
        throw;
    }
    release(std::move(child));
}

}  // namespace canouq
