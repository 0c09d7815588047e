#include "sschema/ocr.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstring>

#include <nlohmann/json.hpp>

#include "sschema/errors.hpp"

namespace sschema {

namespace {

bool rect_in_frame(const Rect& r, const Frame& f) {
    return r.w >= 1 && r.h >= 1 && r.x >= 0 && r.y >= 0 && r.x + r.w <= f.width &&
           r.y + r.h <= f.height;
}

bool rect_contains(const Rect& outer, const Rect& inner) {
    return inner.x >= outer.x && inner.y >= outer.y &&
           inner.x + inner.w <= outer.x + outer.w && inner.y + inner.h <= outer.y + outer.h;
}

Frame crop(const Frame& frame, const Rect& rect) {
    Frame out;
    out.width = rect.w;
    out.height = rect.h;
    out.index = frame.index;
    out.timestamp_ms = frame.timestamp_ms;
    out.luma.resize(static_cast<std::size_t>(rect.w) * rect.h);
    for (int y = 0; y < rect.h; ++y) {
        for (int x = 0; x < rect.w; ++x) {
            out.at(x, y) = frame.at(rect.x + x, rect.y + y);
        }
    }
    return out;
}

struct ChildOutput {
    std::string out;
    std::string err;
    int exit_status = -1;
};

std::string stderr_excerpt(const std::string& err) {
    constexpr std::size_t kMax = 400;
    if (err.size() <= kMax) return err;
    return err.substr(0, kMax) + "...";
}

// Runs `/bin/sh -c command`, feeding `input` on stdin and collecting both
// output streams; kills the child after timeout.
ChildOutput run_child(const std::string& command, const std::vector<std::uint8_t>& input,
                      double timeout_seconds) {
    int in_pipe[2], out_pipe[2], err_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0 || pipe(err_pipe) != 0) {
        throw BackendError("pipe() failed: " + std::string(std::strerror(errno)));
    }
    pid_t pid = fork();
    if (pid < 0) throw BackendError("fork() failed: " + std::string(std::strerror(errno)));
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        close(in_pipe[0]); close(in_pipe[1]);
        close(out_pipe[0]); close(out_pipe[1]);
        close(err_pipe[0]); close(err_pipe[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[1]);

    fcntl(in_pipe[1], F_SETFL, O_NONBLOCK);
    fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
    fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

    ChildOutput result;
    std::size_t written = 0;
    bool stdin_open = true, stdout_open = true, stderr_open = true;
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::milliseconds(static_cast<long>(timeout_seconds * 1000));

    // SIGPIPE is possible if the child exits before reading its input.
    signal(SIGPIPE, SIG_IGN);

    while (stdin_open || stdout_open || stderr_open) {
        auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            kill(pid, SIGKILL);
            waitpid(pid, nullptr, 0);
            close(in_pipe[1]); close(out_pipe[0]); close(err_pipe[0]);
            throw BackendError("OCR child timed out after " + std::to_string(timeout_seconds) +
                               " s; stderr: " + stderr_excerpt(result.err));
        }
        int remaining_ms = static_cast<int>(
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());

        pollfd fds[3];
        nfds_t nfds = 0;
        int in_slot = -1, out_slot = -1, err_slot = -1;
        if (stdin_open) { in_slot = nfds; fds[nfds++] = {in_pipe[1], POLLOUT, 0}; }
        if (stdout_open) { out_slot = nfds; fds[nfds++] = {out_pipe[0], POLLIN, 0}; }
        if (stderr_open) { err_slot = nfds; fds[nfds++] = {err_pipe[0], POLLIN, 0}; }
        int rc = poll(fds, nfds, std::max(1, std::min(remaining_ms, 100)));
        if (rc < 0 && errno != EINTR) {
            kill(pid, SIGKILL);
            waitpid(pid, nullptr, 0);
            close(in_pipe[1]); close(out_pipe[0]); close(err_pipe[0]);
            throw BackendError("poll() failed: " + std::string(std::strerror(errno)));
        }

        if (in_slot >= 0 && (fds[in_slot].revents & (POLLOUT | POLLERR | POLLHUP))) {
            if (fds[in_slot].revents & (POLLERR | POLLHUP)) {
                close(in_pipe[1]);
                stdin_open = false;
            } else {
                ssize_t n = write(in_pipe[1], input.data() + written, input.size() - written);
                if (n > 0) written += static_cast<std::size_t>(n);
                if (n < 0 && errno != EAGAIN && errno != EINTR) {
                    close(in_pipe[1]);
                    stdin_open = false;
                }
                if (written == input.size()) {
                    close(in_pipe[1]);
                    stdin_open = false;
                }
            }
        }
        char buf[4096];
        if (out_slot >= 0 && (fds[out_slot].revents & (POLLIN | POLLHUP))) {
            ssize_t n = read(out_pipe[0], buf, sizeof buf);
            if (n > 0) result.out.append(buf, static_cast<std::size_t>(n));
            else if (n == 0 || (n < 0 && errno != EAGAIN && errno != EINTR)) {
                close(out_pipe[0]);
                stdout_open = false;
            }
        }
        if (err_slot >= 0 && (fds[err_slot].revents & (POLLIN | POLLHUP))) {
            ssize_t n = read(err_pipe[0], buf, sizeof buf);
            if (n > 0) result.err.append(buf, static_cast<std::size_t>(n));
            else if (n == 0 || (n < 0 && errno != EAGAIN && errno != EINTR)) {
                close(err_pipe[0]);
                stderr_open = false;
            }
        }
    }

    int status = 0;
    waitpid(pid, &status, 0);
    result.exit_status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

}  // namespace

ExternalProcessOcrBackend::ExternalProcessOcrBackend(std::string command,
                                                     double timeout_seconds)
    : command_(std::move(command)), timeout_seconds_(timeout_seconds) {
    if (command_.empty()) throw ArgumentError("OCR command must not be empty");
    if (!(timeout_seconds_ > 0.0)) throw ArgumentError("timeout must be positive");
}

std::vector<OcrResult> ExternalProcessOcrBackend::recognize(const Frame& frame,
                                                            const Rect& rect) {
    if (!rect_in_frame(rect, frame)) throw DimensionError("OCR rect outside frame");
    ChildOutput child = run_child(command_, encode_pgm(crop(frame, rect)), timeout_seconds_);
    if (child.exit_status != 0) {
        throw BackendError("OCR child exited with status " +
                           std::to_string(child.exit_status) + "; stderr: " +
                           stderr_excerpt(child.err));
    }

    std::vector<OcrResult> results;
    std::size_t pos = 0;
    while (pos < child.out.size()) {
        std::size_t eol = child.out.find('\n', pos);
        std::string line = child.out.substr(pos, eol == std::string::npos ? std::string::npos
                                                                          : eol - pos);
        pos = eol == std::string::npos ? child.out.size() : eol + 1;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("text") || !j["text"].is_string() ||
            !j.contains("x") || !j.contains("y") || !j.contains("w") || !j.contains("h") ||
            !j.contains("conf")) {
            throw BackendError("malformed OCR result line: " + stderr_excerpt(line));
        }
        OcrResult r;
        r.text = j["text"].get<std::string>();
        r.bbox = Rect{rect.x + j["x"].get<int>(), rect.y + j["y"].get<int>(),
                      j["w"].get<int>(), j["h"].get<int>()};
        r.confidence = j["conf"].get<double>();
        if (r.text.empty()) throw BackendError("OCR result with empty text");
        if (!rect_contains(rect, r.bbox)) {
            throw BackendError("OCR result bbox outside requested rect");
        }
        if (!(r.confidence >= 0.0 && r.confidence <= 1.0)) {
            throw BackendError("OCR confidence outside [0,1]");
        }
        results.push_back(std::move(r));
    }
    return results;
}

void MockOcrBackend::script(int frame_index, const Rect& rect,
                            std::vector<OcrResult> results) {
    for (const auto& r : results) {
        if (r.text.empty()) throw ValidationError("scripted OCR result with empty text");
        if (!rect_contains(rect, r.bbox)) {
            throw ValidationError("scripted OCR bbox outside its rect");
        }
    }
    script_[Key{frame_index, rect.x, rect.y, rect.w, rect.h}] = std::move(results);
}

std::vector<OcrResult> MockOcrBackend::recognize(const Frame& frame, const Rect& rect) {
    auto it = script_.find(Key{frame.index, rect.x, rect.y, rect.w, rect.h});
    if (it == script_.end()) return {};
    return it->second;
}

int levenshtein(std::string_view a, std::string_view b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<int> row(m + 1);
    for (std::size_t j = 0; j <= m; ++j) row[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= n; ++i) {
        int diag = row[0];
        row[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= m; ++j) {
            int sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
            diag = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
        }
    }
    return row[m];
}

std::string normalize_menu_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool in_space = true;  // leading whitespace is dropped
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out += ' ';
        in_space = false;
        out += static_cast<char>(std::tolower(c));
    }
    return out;
}

std::optional<std::pair<std::string, double>> match_menu_item(
    const std::string& text, const std::vector<std::string>& vocabulary) {
    if (vocabulary.empty()) throw ArgumentError("vocabulary must not be empty");
    if (text.empty()) throw ArgumentError("text must not be empty");

    const std::string a = normalize_menu_text(text);
    std::optional<std::pair<std::string, double>> best;
    for (const auto& item : vocabulary) {
        const std::string b = normalize_menu_text(item);
        double score;
        if (a.empty() && b.empty()) {
            score = 1.0;
        } else {
            std::size_t longest = std::max(a.size(), b.size());
            score = 1.0 - static_cast<double>(levenshtein(a, b)) /
                              static_cast<double>(longest);
        }
        if (score >= 0.8 && (!best || score > best->second)) {
            best = {item, score};
        }
    }
    return best;
}

}  // namespace sschema
