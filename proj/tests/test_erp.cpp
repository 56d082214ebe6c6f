#include "oracles.hpp"

#include <vpk/cubemap.hpp>
#include <vpk/erp.hpp>
#include <vpk/viewpoint.hpp>

#include <doctest.h>

#include <random>

using namespace vpk;

TEST_CASE("ERP pixel to direction examples")
{
        const ImageDims dims{1024, 512};
        const Direction c = erp_pixel_to_direction(dims, 512, 256);
        CHECK(c.x() == doctest::Approx(0));
        CHECK(c.y() == doctest::Approx(0));
        CHECK(c.z() == doctest::Approx(1));

        const Direction back = erp_pixel_to_direction(dims, 0, 256);
        CHECK(std::abs(back.x()) < 1e-15);
        CHECK(back.z() == doctest::Approx(-1));

        const Direction d = erp_pixel_to_direction(dims, 768, 128);
        const oracle::V3 o = oracle::lonlat(kPi / 2, kPi / 4);
        CHECK(oracle::angle(o, d) < 1e-15L);
}

TEST_CASE("ERP pixel round trip away from the poles")
{
        const ImageDims dims{1024, 512};
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> ux(0, 1024);
        // |lat| < pi/2 - 1e-3 in rows.
        const double margin = 1e-3 / kPi * 512;
        std::uniform_real_distribution<double> uy(margin, 512 - margin);
        for (int k = 0; k < 100000; ++k)
        {
                const double x = ux(rng);
                const double y = uy(rng);
                const PixelPos p = direction_to_erp_pixel(erp_pixel_to_direction(dims, x, y), dims);
                double dx = std::abs(p.x - x);
                dx = std::min(dx, 1024 - dx);
                REQUIRE(dx < 1e-6);
                REQUIRE(std::abs(p.y - y) < 1e-6);
        }
}

TEST_CASE("ErpImage enforces a 2:1 aspect")
{
        CHECK_THROWS_AS(ErpImage(ImageBuffer(100, 100, 3)), ShapeMismatch);
        CHECK_NOTHROW(ErpImage(ImageBuffer(100, 50, 3)));
}

TEST_CASE("a constant sphere stays constant through every conversion chain")
{
        ImageBuffer buf(128, 64, 3);
        buf.fill(0.625f);
        const ErpImage erp(buf);
        auto max_dev = [](const ImageBuffer& img) {
                double m = 0;
                for (float v : img.data())
                {
                        m = std::max(m, std::abs(v - 0.625));
                }
                return m;
        };
        const CubemapImage cm = erp_to_cubemap(erp, 32);
        for (FaceId f : kAllFaces)
        {
                CHECK(max_dev(cm.face(f)) < 1e-6);
        }
        CHECK(max_dev(cubemap_to_erp(cm, {128, 64}).buffer()) < 1e-6);
        const ViewPointLayout layout(16);
        const ViewPointImage vp = erp_to_viewpoint(erp, layout);
        CHECK(max_dev(vp.buffer()) < 1e-6);
        CHECK(max_dev(reconstruct_erp(vp, {128, 64}, true).buffer()) < 1e-6);
        CHECK(max_dev(reconstruct_erp(cubemap_to_viewpoint(cm, layout), {96, 48}, false).buffer()) < 1e-6);
}

TEST_CASE("resample_to_erp from an ERP source at the same size is the identity")
{
        ImageBuffer buf(64, 32, 1);
        std::mt19937_64 rng(2);
        std::uniform_real_distribution<float> v(0, 1);
        for (float& p : buf.data())
        {
                p = v(rng);
        }
        const std::array<ImageBuffer, 1> planes{buf};
        const ErpImage out = resample_to_erp(ErpGeometry({64, 32}), planes, {64, 32});
        double m = 0;
        for (std::size_t k = 0; k < buf.data().size(); ++k)
        {
                m = std::max(m, static_cast<double>(std::abs(out.buffer().data()[k] - buf.data()[k])));
        }
        CHECK(m < 1e-6);
}
