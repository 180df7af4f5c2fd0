#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "alime/blackbox.hpp"
#include "alime/error.hpp"
#include "alime/subprocess.hpp"

using namespace alime;
using namespace std::chrono_literals;

namespace {

std::vector<std::string> stub(std::initializer_list<std::string> args) {
    std::vector<std::string> argv{ALIME_STUB};
    argv.insert(argv.end(), args);
    return argv;
}

Image random_image(std::size_t w, std::size_t h, std::size_t c, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    std::vector<float> data(w * h * c);
    for (auto& v : data) v = u(rng);
    return Image(w, h, c, data);
}

std::string phase_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const AdapterError& e) {
        return e.phase();
    }
    return "none";
}

}  // namespace

TEST(Wire, FloatBase64RoundTripIsBitExact) {
    std::vector<float> values{0.0f, -0.0f, 1.0f, 0.1f, 3.4e38f, 1e-45f, -7.25f};
    for (std::size_t n = 0; n <= values.size(); ++n) {
        const std::vector<float> part(values.begin(), values.begin() + static_cast<long>(n));
        const auto back = wire::decode_floats(wire::encode_floats(part));
        ASSERT_EQ(back.size(), n);
        for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(std::bit_cast<std::uint32_t>(back[i]), std::bit_cast<std::uint32_t>(part[i]));
    }
}

TEST(Wire, FloatsAreLittleEndian) {
    // 1.0f is 0x3f800000, stored as 00 00 80 3f.
    EXPECT_EQ(wire::encode_floats(std::vector{1.0f}), "AACAPw==");
    EXPECT_THROW(wire::decode_floats("AAC"), ParameterError);
    EXPECT_THROW(wire::decode_floats("AAA="), ParameterError);
}

TEST(Wire, RequestLayout) {
    const Image img(2, 1, 1, std::vector<float>{1.0f, 1.0f});
    EXPECT_EQ(wire::encode_image_request(7, {&img, 1}),
              R"({"id":7,"inputs":[{"w":2,"h":1,"c":1,"data_b64":"AACAPwAAgD8="}]})");
    Matrix pts(2, 2);
    pts << 0.5, -1, 2, 0;
    EXPECT_EQ(wire::encode_point_request(3, pts), R"({"id":3,"inputs":[{"x":[0.5,-1.0]},{"x":[2.0,0.0]}]})");
}

TEST(Wire, HandshakeRoundTrip) {
    const AdapterHandshake hs{1, 4, InputKind::point2d};
    EXPECT_EQ(wire::encode_handshake(hs), R"({"protocol_version":1,"n_classes":4,"input_kind":"point2d"})");
    const auto back = wire::decode_handshake(wire::encode_handshake(hs));
    EXPECT_EQ(back.n_classes, 4u);
    EXPECT_EQ(back.input_kind, InputKind::point2d);
    EXPECT_EQ(phase_of([] { wire::decode_handshake("{\"n_classes\":2}"); }), "handshake");
    EXPECT_EQ(phase_of([] { wire::decode_handshake(R"({"protocol_version":1,"n_classes":2,"input_kind":"x"})"); }),
              "handshake");
}

TEST(Wire, DecodeResponse) {
    const Matrix p = wire::decode_response(R"({"id":2,"probs":[[0.5,0.5],[1,0]]})", 2, 2, 2);
    EXPECT_EQ(p(1, 0), 1.0);
    EXPECT_EQ(phase_of([] { wire::decode_response(R"({"id":3,"probs":[[1,0]]})", 2, 1, 2); }), "response");
    EXPECT_EQ(phase_of([] { wire::decode_response(R"({"id":2,"error":"boom"})", 2, 1, 2); }), "response");
    EXPECT_EQ(phase_of([] { wire::decode_response("not json", 2, 1, 2); }), "response");
    EXPECT_EQ(phase_of([] { wire::decode_response(R"({"id":2,"probs":[[1,0],[1,0]]})", 2, 1, 2); }), "validation");
    EXPECT_EQ(phase_of([] { wire::decode_response(R"({"id":2,"probs":[[0.6,0.3]]})", 2, 1, 2); }), "validation");
    EXPECT_EQ(phase_of([] { wire::decode_response(R"({"id":2,"probs":[[1]]})", 2, 1, 2); }), "validation");
}

TEST(Subprocess, FixedProbabilities) {
    SubprocessBlackBox bb(stub({"fixed", "0.1,0.2,0.7"}), InputKind::image);
    EXPECT_EQ(bb.n_classes(), 3u);
    const std::vector<Image> imgs(3, Image(4, 4, 1, 0.5f));
    const Matrix p = bb.predict_images(imgs);
    ASSERT_EQ(p.rows(), 3);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(p(i, 2), 0.7);
}

TEST(Subprocess, TranscriptHasOneLinePerBatchWithIncreasingIds) {
    const auto path = std::filesystem::temp_directory_path() / ("alime_transcript_" + std::to_string(::getpid()));
    std::filesystem::remove(path);
    {
        SubprocessBlackBox bb(stub({"record", path.string(), "3"}), InputKind::image);
        const Image one = random_image(5, 4, 3, 1);
        std::vector<Image> five;
        for (std::uint32_t i = 0; i < 5; ++i) five.push_back(random_image(3, 2, 1, 10 + i));
        bb.predict_images({&one, 1});
        bb.predict_images(five);
        bb.predict_images({&one, 1});
    }
    std::ifstream in(path);
    std::vector<nlohmann::json> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(nlohmann::json::parse(line));
    std::filesystem::remove(path);
    ASSERT_EQ(lines.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(lines[i]["id"].get<std::uint64_t>(), i);
    ASSERT_EQ(lines[1]["inputs"].size(), 5u);
    const auto& first = lines[1]["inputs"][0];
    EXPECT_EQ(first["w"], 3);
    EXPECT_EQ(first["h"], 2);
    EXPECT_EQ(first["c"], 1);
    const auto decoded = wire::decode_floats(first["data_b64"].get<std::string>());
    const Image expected = random_image(3, 2, 1, 10);
    EXPECT_TRUE(std::equal(decoded.begin(), decoded.end(), expected.data().begin()));
}

TEST(Subprocess, MeanPixelOverTheWireIsBitExact) {
    SubprocessBlackBox remote(stub({"meanpixel"}), InputKind::image);
    auto local = builtin_mean_pixel_classifier();
    std::vector<Image> imgs;
    for (std::uint32_t s = 0; s < 10; ++s) imgs.push_back(random_image(7 + s, 5 + s % 3, s % 2 ? 3 : 1, s));
    const Matrix a = remote.predict_images(imgs), b = local->predict_images(imgs);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index k = 0; k < 2; ++k) EXPECT_EQ(a(i, k), b(i, k));
}

TEST(Subprocess, Points) {
    SubprocessBlackBox bb(stub({"points"}), InputKind::point2d);
    Matrix pts(2, 2);
    pts << 0.0, 0.0, 0.0, std::log(3.0);
    const Matrix p = bb.predict_points(pts);
    EXPECT_NEAR(p(0, 0), 0.5, 1e-15);
    EXPECT_NEAR(p(1, 1), 0.75, 1e-15);
    EXPECT_THROW(bb.predict_images({}), ParameterError);
    EXPECT_THROW(bb.predict_points(Matrix::Zero(1, 3)), DimensionError);
}

TEST(Subprocess, FailureModes) {
    const Image img(2, 2, 1, 0.0f);
    EXPECT_EQ(phase_of([&] { SubprocessBlackBox(stub({"badsum"}), InputKind::image).predict_images({&img, 1}); }),
              "validation");
    EXPECT_EQ(phase_of([&] { SubprocessBlackBox(stub({"error"}), InputKind::image).predict_images({&img, 1}); }),
              "response");
    EXPECT_EQ(phase_of([&] { SubprocessBlackBox(stub({"wrongid"}), InputKind::image).predict_images({&img, 1}); }),
              "response");
    const auto exit_phase =
        phase_of([&] { SubprocessBlackBox(stub({"exit"}), InputKind::image).predict_images({&img, 1}); });
    EXPECT_TRUE(exit_phase == "exit" || exit_phase == "request") << exit_phase;
    EXPECT_EQ(phase_of([] { SubprocessBlackBox(stub({"version"}), InputKind::image); }), "handshake");
    EXPECT_EQ(phase_of([] { SubprocessBlackBox(stub({"points"}), InputKind::image); }), "handshake");
    EXPECT_EQ(phase_of([] { SubprocessBlackBox({"/nonexistent/alime-child"}, InputKind::image); }), "spawn");
}

TEST(Subprocess, SilentChildTimesOut) {
    const Image img(2, 2, 1, 0.0f);
    SubprocessBlackBox bb(stub({"silent"}), InputKind::image, 300ms);
    const auto start = std::chrono::steady_clock::now();
    EXPECT_THROW(bb.predict_images({&img, 1}), TimeoutError);
    EXPECT_LT(std::chrono::steady_clock::now() - start, 5s);
}

TEST(Subprocess, ShellCommandSpec) {
    auto bb = make_blackbox(std::string("cmd:\"") + ALIME_STUB + " fixed 0.25,0.75\"");
    const Image img(2, 2, 1, 0.0f);
    EXPECT_EQ(bb->predict_images({&img, 1})(0, 1), 0.75);
}
