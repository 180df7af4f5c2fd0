#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "alime/blackbox.hpp"

namespace alime {

/// Handshake line written by the child on start-up.
struct AdapterHandshake {
    int protocol_version = 1;
    std::size_t n_classes = 0;
    InputKind input_kind = InputKind::image;
};

inline constexpr int kProtocolVersion = 1;

/// Request/response encoding of the newline-delimited JSON protocol.
namespace wire {
std::string encode_handshake(const AdapterHandshake& hs);
AdapterHandshake decode_handshake(const std::string& line);
std::string encode_image_request(std::uint64_t id, std::span<const Image> images);
std::string encode_point_request(std::uint64_t id, const Matrix& points);
/// Decodes {"id":k,"probs":[[...],...]} or raises AdapterError for {"id":k,"error":"..."}.
Matrix decode_response(const std::string& line, std::uint64_t expected_id, std::size_t n_rows,
                       std::size_t n_classes);
/// Base64 of little-endian float32 samples.
std::string encode_floats(std::span<const float> values);
std::vector<float> decode_floats(const std::string& b64);
}  // namespace wire

/// Black-box backed by a child process speaking the wire protocol over its
/// stdin/stdout. One request line per batch; calls are serialized.
class SubprocessBlackBox final : public BlackBox {
public:
    /// argv[0] is resolved through PATH. Reads and validates the handshake.
    SubprocessBlackBox(std::vector<std::string> argv, InputKind expected_kind,
                       std::chrono::milliseconds timeout = std::chrono::seconds(120));
    ~SubprocessBlackBox() override;

    SubprocessBlackBox(const SubprocessBlackBox&) = delete;
    SubprocessBlackBox& operator=(const SubprocessBlackBox&) = delete;

    std::size_t n_classes() const override { return handshake_.n_classes; }
    InputKind input_kind() const override { return handshake_.input_kind; }
    Matrix predict_images(std::span<const Image> images) override;
    Matrix predict_points(const Matrix& points) override;

private:
    void shutdown() noexcept;
    Matrix round_trip(const std::string& request, std::uint64_t id, std::size_t n_rows);
    void write_line(const std::string& line);
    std::string read_line(const char* phase);

    std::chrono::milliseconds timeout_;
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
    AdapterHandshake handshake_;
    std::uint64_t next_id_ = 0;
    std::mutex mutex_;
};

std::unique_ptr<BlackBox> subprocess_adapter(std::vector<std::string> argv, InputKind kind,
                                             std::chrono::milliseconds timeout = std::chrono::seconds(120));

}  // namespace alime
