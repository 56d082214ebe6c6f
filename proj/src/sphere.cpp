#include <vpk/sphere.hpp>

#include <cmath>

namespace vpk
{
namespace
{
constexpr std::array<FaceFrame, 6> kFrames{{
        {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}},   // F
        {{1, 0, 0}, {0, 0, -1}, {0, 1, 0}},  // R
        {{0, 0, -1}, {-1, 0, 0}, {0, 1, 0}}, // B
        {{-1, 0, 0}, {0, 0, 1}, {0, 1, 0}},  // L
        {{0, 1, 0}, {1, 0, 0}, {0, 0, -1}},  // U
        {{0, -1, 0}, {1, 0, 0}, {0, 0, 1}},  // D
}};

constexpr std::array<std::string_view, 6> kFaceNames{"F", "R", "B", "L", "U", "D"};
}

double norm(const Vec3& v)
{
        return std::sqrt(dot(v, v));
}

Direction::Direction(const Vec3& v)
{
        const double len = norm(v);
        if (!(len > 0) || !std::isfinite(len))
        {
                throw DomainError("cannot normalize a zero or non-finite vector");
        }
        v_ = v * (1.0 / len);
}

double angle_between(const Direction& a, const Direction& b)
{
        return std::atan2(norm(cross(a.vec(), b.vec())), dot(a.vec(), b.vec()));
}

LonLat LonLat::make(double lon, double lat)
{
        if (!(std::abs(lat) <= kPi / 2))
        {
                throw DomainError("latitude outside [-pi/2, pi/2]");
        }
        double w = std::fmod(lon + kPi, 2 * kPi);
        if (w < 0)
        {
                w += 2 * kPi;
        }
        w -= kPi;
        if (w >= kPi)
        {
                w = -kPi;
        }
        return {w, lat};
}

std::string_view face_name(FaceId f)
{
        return kFaceNames[static_cast<int>(f)];
}

std::optional<FaceId> face_from_name(std::string_view name)
{
        for (FaceId f : kAllFaces)
        {
                if (face_name(f) == name)
                {
                        return f;
                }
        }
        return std::nullopt;
}

void CameraPose::validate() const
{
        if (!(hfov > 0 && hfov < kPi) || !(vfov > 0 && vfov < kPi))
        {
                throw DomainError("camera field of view must lie strictly inside (0, pi)");
        }
        if (!std::isfinite(yaw) || !std::isfinite(pitch) || !std::isfinite(roll))
        {
                throw DomainError("camera angles must be finite");
        }
}

CameraPose CameraPose::for_face(FaceId f)
{
        CameraPose cam;
        switch (f)
        {
        case FaceId::F:
                break;
        case FaceId::R:
                cam.yaw = kPi / 2;
                break;
        case FaceId::B:
                cam.yaw = kPi;
                break;
        case FaceId::L:
                cam.yaw = -kPi / 2;
                break;
        case FaceId::U:
                cam.pitch = kPi / 2;
                break;
        case FaceId::D:
                cam.pitch = -kPi / 2;
                break;
        }
        return cam;
}

Direction lonlat_to_direction(const LonLat& c)
{
        const double cl = std::cos(c.lat);
        return Direction::from_unit({cl * std::sin(c.lon), std::sin(c.lat), cl * std::cos(c.lon)});
}

LonLat direction_to_lonlat(const Direction& d)
{
        const double h = std::hypot(d.x(), d.z());
        const double lat = std::atan2(d.y(), h);
        double lon = h > 0 ? std::atan2(d.x(), d.z()) : 0.0;
        if (lon >= kPi)
        {
                lon = -kPi;
        }
        return {lon, lat};
}

const FaceFrame& face_basis(FaceId f)
{
        return kFrames[static_cast<int>(f)];
}

Vec3 face_point(const FaceCoord& fc)
{
        const FaceFrame& fr = face_basis(fc.face);
        return fr.normal + fr.right * fc.u + fr.up * fc.v;
}

Direction face_coord_to_direction(const FaceCoord& fc)
{
        return Direction(face_point(fc));
}

FaceCoord direction_to_face_coord(const Direction& d)
{
        // Strict comparison keeps the first face in F,R,B,L,U,D order on ties.
        FaceId best = FaceId::F;
        double best_dot = dot(d.vec(), kFrames[0].normal);
        for (int k = 1; k < 6; ++k)
        {
                const double c = dot(d.vec(), kFrames[k].normal);
                if (c > best_dot)
                {
                        best_dot = c;
                        best = static_cast<FaceId>(k);
                }
        }
        const FaceFrame& fr = face_basis(best);
        return {best, dot(d.vec(), fr.right) / best_dot, dot(d.vec(), fr.up) / best_dot};
}

FaceFrame camera_frame(const CameraPose& cam)
{
        const double cy = std::cos(cam.yaw);
        const double sy = std::sin(cam.yaw);
        const double cp = std::cos(cam.pitch);
        const double sp = std::sin(cam.pitch);
        const double cr = std::cos(cam.roll);
        const double sr = std::sin(cam.roll);

        const Vec3 forward{sy * cp, sp, cy * cp};
        const Vec3 right0{cy, 0, -sy};
        const Vec3 up0{-sy * sp, cp, -cy * sp};

        return {forward, right0 * cr + up0 * sr, up0 * cr - right0 * sr};
}

std::optional<FrustumHit> direction_in_frustum(const Direction& d, const CameraPose& cam)
{
        const FaceFrame fr = camera_frame(cam);
        const double z = dot(d.vec(), fr.normal);
        if (!(z > 0))
        {
                return std::nullopt;
        }
        const double tx = std::tan(cam.hfov / 2);
        const double ty = std::tan(cam.vfov / 2);
        const double xn = dot(d.vec(), fr.right) / z / tx;
        const double yn = dot(d.vec(), fr.up) / z / ty;
        if (std::abs(xn) > 1 || std::abs(yn) > 1)
        {
                return std::nullopt;
        }
        return FrustumHit{(xn + 1) / 2, (1 - yn) / 2};
}

}
