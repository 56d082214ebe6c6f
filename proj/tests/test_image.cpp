#include <vpk/image.hpp>

#include <doctest.h>

#include <array>
#include <random>

using namespace vpk;

namespace
{
float sample1(const ImageBuffer& img, double x, double y, bool wrap = false)
{
        std::array<float, 4> out{};
        sample_bilinear(img, x, y, wrap, out);
        return out[0];
}
}

TEST_CASE("sampling at a pixel centre returns the pixel")
{
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<float> v(0, 1);
        ImageBuffer img(7, 5, 1);
        for (float& p : img.data())
        {
                p = v(rng);
        }
        for (int y = 0; y < 5; ++y)
        {
                for (int x = 0; x < 7; ++x)
                {
                        CHECK(sample1(img, x + 0.5, y + 0.5) == img.at(x, y, 0));
                }
        }
}

TEST_CASE("constant image samples to the constant everywhere")
{
        ImageBuffer img(4, 3, 3);
        img.fill(0.375f);
        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> u(-2, 6);
        for (int k = 0; k < 1000; ++k)
        {
                std::array<float, 4> out{};
                sample_bilinear(img, u(rng), u(rng), k % 2 == 0, out);
                CHECK(out[0] == 0.375f);
                CHECK(out[2] == 0.375f);
        }
}

TEST_CASE("2x2 image sampled at the shared corner gives the mean")
{
        ImageBuffer img(2, 2, 1, {0.1f, 0.2f, 0.3f, 0.6f});
        // All four bilinear weights are 1/4 at (1, 1).
        CHECK(sample1(img, 1.0, 1.0) == doctest::Approx((0.1 + 0.2 + 0.3 + 0.6) / 4));
}

TEST_CASE("affine images are reproduced exactly at interior points")
{
        ImageBuffer img(9, 6, 1);
        auto f = [](double x, double y) { return 0.02 * x - 0.03 * y + 0.4; };
        for (int y = 0; y < 6; ++y)
        {
                for (int x = 0; x < 9; ++x)
                {
                        img.at(x, y, 0) = static_cast<float>(f(x + 0.5, y + 0.5));
                }
        }
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> ux(0.5, 8.5);
        std::uniform_real_distribution<double> uy(0.5, 5.5);
        for (int k = 0; k < 1000; ++k)
        {
                const double x = ux(rng);
                const double y = uy(rng);
                CHECK(sample1(img, x, y) == doctest::Approx(f(x, y)).epsilon(1e-6));
        }
}

TEST_CASE("wrapped sampling blends the first and last columns")
{
        ImageBuffer img(4, 1, 1, {1, 0, 0, 3});
        CHECK(sample1(img, 0.0, 0.5, true) == doctest::Approx(2.0));
        CHECK(sample1(img, 4.0, 0.5, true) == doctest::Approx(2.0));
        CHECK(sample1(img, 0.0, 0.5, false) == doctest::Approx(1.0));
}

TEST_CASE("sRGB transfer functions invert each other")
{
        for (int k = 0; k <= 255; ++k)
        {
                const float v = k / 255.0f;
                CHECK(linear_to_srgb(srgb_to_linear(v)) == doctest::Approx(v).epsilon(1e-5));
        }
        CHECK(srgb_to_linear(0.0f) == 0.0f);
        CHECK(srgb_to_linear(1.0f) == doctest::Approx(1.0f));
        CHECK(srgb_to_linear(0.5f) == doctest::Approx(0.214041f).epsilon(1e-5));
}

TEST_CASE("colour space conversion leaves alpha alone")
{
        ImageBuffer img(1, 1, 4, {0.5f, 0.5f, 0.5f, 0.5f}, ColorSpace::Srgb);
        const ImageBuffer lin = to_linear(img);
        CHECK(lin.colorspace() == ColorSpace::Linear);
        CHECK(lin.at(0, 0, 0) == doctest::Approx(0.214041f).epsilon(1e-5));
        CHECK(lin.at(0, 0, 3) == 0.5f);
        const ImageBuffer back = to_colorspace(lin, ColorSpace::Srgb);
        CHECK(back.at(0, 0, 0) == doctest::Approx(0.5f).epsilon(1e-5));
}

TEST_CASE("crop and paste")
{
        ImageBuffer img(4, 4, 1);
        for (int k = 0; k < 16; ++k)
        {
                img.data()[k] = static_cast<float>(k);
        }
        const ImageBuffer c = img.crop(1, 2, 2, 2);
        CHECK(c.at(0, 0, 0) == 9);
        CHECK(c.at(1, 1, 0) == 14);
        ImageBuffer dst(4, 4, 1);
        dst.paste(c, 0, 0);
        CHECK(dst.at(1, 1, 0) == 14);
        CHECK(dst.at(2, 2, 0) == 0);
        CHECK_THROWS_AS(img.crop(3, 3, 2, 2), ShapeMismatch);
}
