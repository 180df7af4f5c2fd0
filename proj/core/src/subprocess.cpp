#include "alime/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <cstring>
#include <thread>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "alime/error.hpp"

extern char** environ;

namespace alime {

using OrderedJson = nlohmann::ordered_json;

namespace wire {

std::string encode_floats(std::span<const float> values) {
    std::vector<unsigned char> raw(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto bits = std::bit_cast<std::uint32_t>(values[i]);
        for (std::size_t b = 0; b < 4; ++b) raw[4 * i + b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xffu);
    }
    std::string out(4 * ((raw.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), raw.data(), static_cast<int>(raw.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::vector<float> decode_floats(const std::string& b64) {
    if (b64.size() % 4 != 0) throw ParameterError("base64 payload length is not a multiple of 4");
    std::vector<unsigned char> raw(b64.size() / 4 * 3);
    const int n = EVP_DecodeBlock(raw.data(), reinterpret_cast<const unsigned char*>(b64.data()),
                                  static_cast<int>(b64.size()));
    if (n < 0) throw ParameterError("invalid base64 payload");
    std::size_t len = static_cast<std::size_t>(n);
    for (auto it = b64.rbegin(); it != b64.rend() && *it == '='; ++it) --len;
    if (len % 4 != 0) throw ParameterError("float payload is not a whole number of 32-bit values");
    std::vector<float> out(len / 4);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint32_t bits = 0;
        for (std::size_t b = 0; b < 4; ++b) bits |= std::uint32_t{raw[4 * i + b]} << (8 * b);
        out[i] = std::bit_cast<float>(bits);
    }
    return out;
}

std::string encode_handshake(const AdapterHandshake& hs) {
    OrderedJson j;
    j["protocol_version"] = hs.protocol_version;
    j["n_classes"] = hs.n_classes;
    j["input_kind"] = to_string(hs.input_kind);
    return j.dump();
}

AdapterHandshake decode_handshake(const std::string& line) {
    try {
        const auto j = nlohmann::json::parse(line);
        AdapterHandshake hs;
        hs.protocol_version = j.at("protocol_version").get<int>();
        hs.n_classes = j.at("n_classes").get<std::size_t>();
        hs.input_kind = input_kind_from_string(j.at("input_kind").get<std::string>());
        return hs;
    } catch (const nlohmann::json::exception& e) {
        throw AdapterError("handshake", std::string("malformed handshake: ") + e.what());
    } catch (const ParameterError& e) {
        throw AdapterError("handshake", e.what());
    }
}

std::string encode_image_request(std::uint64_t id, std::span<const Image> images) {
    OrderedJson j;
    j["id"] = id;
    auto& inputs = j["inputs"] = OrderedJson::array();
    for (const auto& img : images) {
        OrderedJson in;
        in["w"] = img.width();
        in["h"] = img.height();
        in["c"] = img.channels();
        in["data_b64"] = encode_floats(img.data());
        inputs.push_back(std::move(in));
    }
    return j.dump();
}

std::string encode_point_request(std::uint64_t id, const Matrix& points) {
    OrderedJson j;
    j["id"] = id;
    auto& inputs = j["inputs"] = OrderedJson::array();
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        OrderedJson in;
        in["x"] = {points(i, 0), points(i, 1)};
        inputs.push_back(std::move(in));
    }
    return j.dump();
}

Matrix decode_response(const std::string& line, std::uint64_t expected_id, std::size_t n_rows, std::size_t n_classes) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw AdapterError("response", std::string("malformed JSON: ") + e.what());
    }
    try {
        const auto id = j.at("id").get<std::uint64_t>();
        if (id != expected_id)
            throw AdapterError("response", "id " + std::to_string(id) + " does not match request " +
                                               std::to_string(expected_id));
        if (j.contains("error")) throw AdapterError("response", "child reported: " + j["error"].dump());
        const auto& rows = j.at("probs");
        if (!rows.is_array() || rows.size() != n_rows)
            throw AdapterError("validation", "expected " + std::to_string(n_rows) + " probability rows");
        Matrix probs(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_classes));
        for (std::size_t i = 0; i < n_rows; ++i) {
            const auto& row = rows[i];
            if (!row.is_array() || row.size() != n_classes)
                throw AdapterError("validation", "row " + std::to_string(i) + " does not have " +
                                                     std::to_string(n_classes) + " classes");
            for (std::size_t k = 0; k < n_classes; ++k)
                probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k].get<double>();
        }
        try {
            validate_probabilities(probs, n_rows, n_classes);
        } catch (const ParameterError& e) {
            throw AdapterError("validation", e.what());
        }
        return probs;
    } catch (const nlohmann::json::exception& e) {
        throw AdapterError("response", std::string("unexpected response shape: ") + e.what());
    }
}

}  // namespace wire

namespace {

void ignore_sigpipe() {
    static std::once_flag once;
    std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

}  // namespace

SubprocessBlackBox::SubprocessBlackBox(std::vector<std::string> argv, InputKind expected_kind,
                                       std::chrono::milliseconds timeout)
    : timeout_(timeout) {
    if (argv.empty()) throw AdapterError("spawn", "empty command");
    ignore_sigpipe();

    int in_pipe[2], out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw AdapterError("spawn", std::strerror(errno));
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        throw AdapterError("spawn", std::strerror(errno));
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

    std::vector<char*> cargv;
    for (auto& a : argv) cargv.push_back(a.data());
    cargv.push_back(nullptr);
    pid_t pid = -1;
    const int rc = ::posix_spawnp(&pid, cargv[0], &actions, nullptr, cargv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    if (rc != 0) {
        ::close(in_pipe[1]);
        ::close(out_pipe[0]);
        throw AdapterError("spawn", "cannot start '" + argv[0] + "': " + std::strerror(rc));
    }
    pid_ = pid;
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];

    try {
        handshake_ = wire::decode_handshake(read_line("handshake"));
        if (handshake_.protocol_version != kProtocolVersion)
            throw AdapterError("handshake", "unsupported protocol version " + std::to_string(handshake_.protocol_version));
        if (handshake_.n_classes == 0) throw AdapterError("handshake", "n_classes must be positive");
        if (handshake_.input_kind != expected_kind)
            throw AdapterError("handshake", "child serves " + to_string(handshake_.input_kind) + " inputs, expected " +
                                                to_string(expected_kind));
    } catch (...) {
        shutdown();
        throw;
    }
}

SubprocessBlackBox::~SubprocessBlackBox() { shutdown(); }

void SubprocessBlackBox::shutdown() noexcept {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    to_child_ = from_child_ = -1;
    if (pid_ > 0) {
        int status = 0;
        for (int i = 0; i < 200; ++i) {
            if (::waitpid(pid_, &status, WNOHANG) != 0) {
                pid_ = -1;
                return;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
        pid_ = -1;
    }
}

void SubprocessBlackBox::write_line(const std::string& line) {
    std::string data = line + '\n';
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::write(to_child_, data.data() + off, data.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw AdapterError("request", errno == EPIPE ? "child exited" : std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
    }
}

std::string SubprocessBlackBox::read_line(const char* phase) {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
        if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return line;
        }
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) throw TimeoutError(std::string("no reply during ") + phase);
        pollfd pfd{from_child_, POLLIN, 0};
        const int pr = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
        if (pr < 0) {
            if (errno == EINTR) continue;
            throw AdapterError(phase, std::strerror(errno));
        }
        if (pr == 0) continue;
        char chunk[65536];
        const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw AdapterError(phase, std::strerror(errno));
        }
        if (n == 0) throw AdapterError("exit", std::string("child closed its output during ") + phase);
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

Matrix SubprocessBlackBox::round_trip(const std::string& request, std::uint64_t id, std::size_t n_rows) {
    write_line(request);
    return wire::decode_response(read_line("response"), id, n_rows, handshake_.n_classes);
}

Matrix SubprocessBlackBox::predict_images(std::span<const Image> images) {
    if (handshake_.input_kind != InputKind::image) return BlackBox::predict_images(images);
    std::lock_guard lock(mutex_);
    const std::uint64_t id = next_id_++;
    return round_trip(wire::encode_image_request(id, images), id, images.size());
}

Matrix SubprocessBlackBox::predict_points(const Matrix& points) {
    if (handshake_.input_kind != InputKind::point2d) return BlackBox::predict_points(points);
    if (points.cols() != 2) throw DimensionError("the wire protocol carries 2-D points only");
    std::lock_guard lock(mutex_);
    const std::uint64_t id = next_id_++;
    return round_trip(wire::encode_point_request(id, points), id, static_cast<std::size_t>(points.rows()));
}

std::unique_ptr<BlackBox> subprocess_adapter(std::vector<std::string> argv, InputKind kind,
                                             std::chrono::milliseconds timeout) {
    return std::make_unique<SubprocessBlackBox>(std::move(argv), kind, timeout);
}

}  // namespace alime
