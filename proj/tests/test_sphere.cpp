#include "oracles.hpp"

#include <vpk/sphere.hpp>

#include <doctest.h>

#include <random>

using namespace vpk;

namespace
{
void check_vec(const Direction& d, double x, double y, double z, double tol = 1e-15)
{
        CHECK(std::abs(d.x() - x) <= tol);
        CHECK(std::abs(d.y() - y) <= tol);
        CHECK(std::abs(d.z() - z) <= tol);
}

Direction random_direction(std::mt19937_64& rng)
{
        std::normal_distribution<double> g;
        return Direction(Vec3{g(rng), g(rng), g(rng)});
}
}

TEST_CASE("lonlat_to_direction on the axes")
{
        check_vec(lonlat_to_direction({0, 0}), 0, 0, 1);
        check_vec(lonlat_to_direction({kPi / 2, 0}), 1, 0, 0);
}

TEST_CASE("lonlat_to_direction against an extended precision evaluation")
{
        const Direction d = lonlat_to_direction({0.3, -0.2});
        const oracle::V3 o = oracle::lonlat(0.3L, -0.2L);
        CHECK(std::abs(d.x() - static_cast<double>(o.x)) < 1e-15);
        CHECK(std::abs(d.y() - static_cast<double>(o.y)) < 1e-15);
        CHECK(std::abs(d.z() - static_cast<double>(o.z)) < 1e-15);
}

TEST_CASE("direction_to_lonlat on the axes and at the pole")
{
        const LonLat f = direction_to_lonlat(Direction(Vec3{0, 0, 1}));
        CHECK(f.lon == 0);
        CHECK(f.lat == 0);
        const LonLat n = direction_to_lonlat(Direction(Vec3{0, 1, 0}));
        CHECK(n.lon == 0);
        CHECK(n.lat == doctest::Approx(kPi / 2));
}

TEST_CASE("lonlat round trip over random directions")
{
        std::mt19937_64 rng(1);
        long double worst = 0;
        for (int k = 0; k < 1000000; ++k)
        {
                const Direction d = random_direction(rng);
                const LonLat c = direction_to_lonlat(d);
                const oracle::V3 back = oracle::lonlat(c.lon, c.lat);
                worst = std::max(worst, oracle::angle(back, d));
        }
        CHECK(worst < 1e-7L);
}

TEST_CASE("lonlat coordinates survive a round trip away from the poles")
{
        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> lon(-kPi, kPi);
        std::uniform_real_distribution<double> lat(-kPi / 2 + 1e-6, kPi / 2 - 1e-6);
        for (int k = 0; k < 100000; ++k)
        {
                const LonLat c{lon(rng), lat(rng)};
                const LonLat r = direction_to_lonlat(lonlat_to_direction(c));
                REQUIRE(std::abs(r.lon - c.lon) < 1e-9);
                REQUIRE(std::abs(r.lat - c.lat) < 1e-9);
        }
}

TEST_CASE("LonLat::make wraps longitude and rejects bad latitude")
{
        CHECK(LonLat::make(kPi, 0).lon == doctest::Approx(-kPi));
        CHECK(LonLat::make(3 * kPi / 2, 0).lon == doctest::Approx(-kPi / 2));
        CHECK_THROWS_AS(LonLat::make(0, 2), DomainError);
}

TEST_CASE("Direction rejects degenerate vectors")
{
        CHECK_THROWS_AS(Direction(Vec3{0, 0, 0}), DomainError);
        CHECK_THROWS_AS(Direction(Vec3{std::nan(""), 0, 1}), DomainError);
}

TEST_CASE("face frames")
{
        const FaceFrame& f = face_basis(FaceId::F);
        CHECK(f.normal.z == 1);
        CHECK(f.right.x == 1);
        CHECK(f.up.y == 1);
        const FaceFrame& u = face_basis(FaceId::U);
        CHECK(u.normal.y == 1);
        CHECK(u.right.x == 1);
        CHECK(u.up.z == -1);

        for (FaceId id : kAllFaces)
        {
                const FaceFrame& b = face_basis(id);
                // det[right, up, normal] = +1.
                CHECK(dot(b.right, b.up) == 0);
                CHECK(dot(b.right, b.normal) == 0);
                CHECK(dot(b.up, b.normal) == 0);
                CHECK(dot(b.right, b.right) == 1);
                const Vec3 c = cross(b.right, b.up);
                CHECK(dot(c, b.normal) == 1);
        }
}

TEST_CASE("direction_to_face_coord examples and tie break")
{
        const FaceCoord c = direction_to_face_coord(Direction(Vec3{0, 0, 1}));
        CHECK(c.face == FaceId::F);
        CHECK(c.u == 0);
        CHECK(c.v == 0);

        const FaceCoord e = direction_to_face_coord(Direction(Vec3{1, 0, 1}));
        CHECK(e.face == FaceId::F);
        CHECK(e.u == doctest::Approx(1));
        CHECK(e.v == doctest::Approx(0));
}

TEST_CASE("face selection matches the largest component and is scale invariant")
{
        std::mt19937_64 rng(3);
        std::normal_distribution<double> g;
        for (int k = 0; k < 100000; ++k)
        {
                const Vec3 v{g(rng), g(rng), g(rng)};
                const FaceId expect = oracle::dominant_face(v.x, v.y, v.z);
                REQUIRE(direction_to_face_coord(Direction(v)).face == expect);
                REQUIRE(direction_to_face_coord(Direction(v * 37.5)).face == expect);
        }
}

TEST_CASE("face coordinate round trips")
{
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> uv(-0.999999, 0.999999);
        for (FaceId f : kAllFaces)
        {
                for (int k = 0; k < 20000; ++k)
                {
                        const FaceCoord fc{f, uv(rng), uv(rng)};
                        const FaceCoord r = direction_to_face_coord(face_coord_to_direction(fc));
                        REQUIRE(r.face == f);
                        REQUIRE(std::abs(r.u - fc.u) < 1e-9);
                        REQUIRE(std::abs(r.v - fc.v) < 1e-9);
                }
        }

        double worst = 0;
        for (int k = 0; k < 100000; ++k)
        {
                const Direction d = random_direction(rng);
                worst = std::max(worst, angle_between(d, face_coord_to_direction(direction_to_face_coord(d))));
        }
        CHECK(worst < 1e-9);
}

TEST_CASE("camera frames of the face poses look along the face normals")
{
        for (FaceId f : kAllFaces)
        {
                const CameraPose p = CameraPose::for_face(f);
                const FaceFrame cam = camera_frame(p);
                const FaceFrame& face = face_basis(f);
                CHECK(dot(cam.normal, face.normal) == doctest::Approx(1));
                CHECK(dot(cam.right, face.right) == doctest::Approx(1));
                CHECK(dot(cam.up, face.up) == doctest::Approx(1));
        }
}

TEST_CASE("frustum test")
{
        CameraPose cam;
        const auto centre = direction_in_frustum(Direction(Vec3{0, 0, 1}), cam);
        REQUIRE(centre);
        CHECK(centre->px == doctest::Approx(0.5));
        CHECK(centre->py == doctest::Approx(0.5));
        CHECK_FALSE(direction_in_frustum(Direction(Vec3{0, 0, -1}), cam));
        CHECK_FALSE(direction_in_frustum(Direction(Vec3{1.01, 0, 1}), cam));

        const auto corner = direction_in_frustum(Direction(Vec3{-0.5, 0.5, 1}), cam);
        REQUIRE(corner);
        CHECK(corner->px == doctest::Approx(0.25));
        CHECK(corner->py == doctest::Approx(0.25));

        cam.hfov = kPi;
        CHECK_THROWS_AS(cam.validate(), DomainError);
}
