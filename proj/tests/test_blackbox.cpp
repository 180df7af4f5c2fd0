#include <gtest/gtest.h>

#include <cmath>

#include "alime/blackbox.hpp"
#include "alime/error.hpp"

using namespace alime;

TEST(Softmax, Examples) {
    const auto p = softmax(std::vector{0.0, std::log(3.0)});
    EXPECT_NEAR(p[0], 0.25, 1e-15);
    EXPECT_NEAR(p[1], 0.75, 1e-15);
    const auto big = softmax(std::vector{1000.0, 1000.0, 1000.0});
    for (double v : big) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
    const auto shifted = softmax(std::vector{1.5, -2.0, 0.25});
    const auto base = softmax(std::vector{11.5, 8.0, 10.25});
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(shifted[k], base[k], 1e-15);
    EXPECT_TRUE(softmax(std::vector<double>{}).empty());
}

TEST(ValidateProbabilities, AcceptsAndRejects) {
    Matrix ok(2, 2);
    ok << 0.25, 0.75, 1.0, 0.0;
    EXPECT_NO_THROW(validate_probabilities(ok, 2, 2));
    EXPECT_THROW(validate_probabilities(ok, 3, 2), ParameterError);
    EXPECT_THROW(validate_probabilities(ok, 2, 3), ParameterError);
    Matrix neg(1, 2);
    neg << 1.1, -0.1;
    EXPECT_THROW(validate_probabilities(neg, 1, 2), ParameterError);
    Matrix sum(1, 2);
    sum << 0.6, 0.3;
    EXPECT_THROW(validate_probabilities(sum, 1, 2), ParameterError);
    Matrix nan(1, 2);
    nan << std::nan(""), 1.0;
    EXPECT_THROW(validate_probabilities(nan, 1, 2), ParameterError);
}

TEST(Quadrant, BrightQuadrantWins) {
    auto bb = builtin_quadrant_classifier();
    ASSERT_EQ(bb->n_classes(), 4u);
    for (std::size_t q = 0; q < 4; ++q) {
        Image img(6, 4, 1, 0.0f);
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t c = 0; c < 6; ++c)
                if ((r < 2 ? 0u : 2u) + (c < 3 ? 0u : 1u) == q) img.at(r, c) = 1.0f;
        const Matrix p = bb->predict_images({&img, 1});
        const double hi = std::exp(4.0) / (std::exp(4.0) + 3.0);
        for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(p(0, k), k == q ? hi : 1.0 / (std::exp(4.0) + 3.0), 1e-14);
    }
}

TEST(Quadrant, OddSizesSplitAtFloor) {
    // 3x3: TL is the single pixel (0,0); the right column and bottom row go to TR/BL/BR.
    Image img(3, 3, 1, 0.0f);
    img.at(0, 0) = 0.5f;
    const Matrix p = builtin_quadrant_classifier()->predict_images({&img, 1});
    const double z = std::exp(2.0) + 3.0;
    EXPECT_NEAR(p(0, 0), std::exp(2.0) / z, 1e-14);
    EXPECT_NEAR(p(0, 3), 1.0 / z, 1e-14);
}

TEST(Quadrant, OneByOneImageHasEmptyQuadrants) {
    Image img(1, 1, 3, 1.0f);
    const Matrix p = builtin_quadrant_classifier()->predict_images({&img, 1});
    validate_probabilities(p, 1, 4);
    EXPECT_GT(p(0, 3), p(0, 0));
}

TEST(MeanPixel, Examples) {
    Image img(2, 1, 3, std::vector<float>{0, 0, 0, 1, 1, 1});
    const Matrix p = builtin_mean_pixel_classifier()->predict_images({&img, 1});
    EXPECT_NEAR(p(0, 1), 1.0 / (1.0 + std::exp(-0.5)), 1e-15);
}

TEST(ConstantBlackBox, RepeatsRowForBothKinds) {
    auto bb = constant_blackbox({0.2, 0.8}, InputKind::point2d);
    EXPECT_EQ(bb->input_kind(), InputKind::point2d);
    const Matrix p = bb->predict_points(Matrix::Zero(3, 2));
    ASSERT_EQ(p.rows(), 3);
    EXPECT_EQ(p(2, 1), 0.8);
    EXPECT_THROW(constant_blackbox({0.5, 0.6}), ParameterError);
}

TEST(BlackBox, WrongInputKindThrows) {
    EXPECT_THROW(builtin_quadrant_classifier()->predict_points(Matrix::Zero(1, 2)), ParameterError);
}

TEST(MakeBlackBox, Specs) {
    EXPECT_EQ(make_blackbox("builtin:quadrant")->n_classes(), 4u);
    EXPECT_EQ(make_blackbox("builtin:meanpixel")->n_classes(), 2u);
    EXPECT_THROW(make_blackbox("builtin:resnet"), ParameterError);
    EXPECT_THROW(make_blackbox("cmd:"), ParameterError);
    EXPECT_THROW(make_blackbox("cmd:\"\""), ParameterError);
    EXPECT_THROW(make_blackbox("cmd:\"exit 3\""), AdapterError);
}

TEST(InputKind, Strings) {
    EXPECT_EQ(input_kind_from_string(to_string(InputKind::point2d)), InputKind::point2d);
    EXPECT_EQ(input_kind_from_string("image"), InputKind::image);
    EXPECT_THROW(input_kind_from_string("audio"), ParameterError);
}
