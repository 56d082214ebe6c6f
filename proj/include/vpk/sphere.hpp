#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vpk
{
inline constexpr double kPi = 3.14159265358979323846;

/// Raised when a geometric routine receives an argument outside its domain.
class DomainError : public std::domain_error
{
public:
        using std::domain_error::domain_error;
};

struct Vec3
{
        double x = 0;
        double y = 0;
        double z = 0;

        constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
        constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
        constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
        constexpr Vec3 operator-() const { return {-x, -y, -z}; }
};

constexpr double dot(const Vec3& a, const Vec3& b)
{
        return a.x * b.x + a.y * b.y + a.z * b.z;
}

constexpr Vec3 cross(const Vec3& a, const Vec3& b)
{
        return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

double norm(const Vec3& v);

/// Unit vector on the sphere. +Z front, +X right, +Y up.
class Direction
{
public:
        constexpr Direction() = default;

        /// Normalizes v; throws DomainError for a zero or non-finite vector.
        explicit Direction(const Vec3& v);

        static Direction from_unit(const Vec3& v) { return Direction(v, 0); }

        double x() const { return v_.x; }
        double y() const { return v_.y; }
        double z() const { return v_.z; }
        const Vec3& vec() const { return v_; }

private:
        constexpr Direction(const Vec3& v, int) : v_(v) { }

        Vec3 v_{0, 0, 1};
};

/// Angle in radians between two directions, accurate near 0 and pi.
double angle_between(const Direction& a, const Direction& b);

/// Longitude in [-pi, pi), latitude in [-pi/2, pi/2].
struct LonLat
{
        double lon = 0;
        double lat = 0;

        /// Wraps lon modulo 2pi; rejects |lat| > pi/2.
        static LonLat make(double lon, double lat);
};

enum class FaceId : int
{
        F = 0,
        R = 1,
        B = 2,
        L = 3,
        U = 4,
        D = 5
};

inline constexpr std::array<FaceId, 6> kAllFaces{FaceId::F, FaceId::R, FaceId::B,
                                                 FaceId::L, FaceId::U, FaceId::D};

constexpr bool is_horizontal(FaceId f)
{
        return static_cast<int>(f) < 4;
}

std::string_view face_name(FaceId f);
std::optional<FaceId> face_from_name(std::string_view name);

struct FaceFrame
{
        Vec3 normal;
        Vec3 right;
        Vec3 up;
};

/// Local gnomonic coordinates on one cube face, u to the right and v up.
struct FaceCoord
{
        FaceId face = FaceId::F;
        double u = 0;
        double v = 0;
};

struct CameraPose
{
        double yaw = 0;
        double pitch = 0;
        double roll = 0;
        double hfov = kPi / 2;
        double vfov = kPi / 2;

        /// Throws DomainError unless both fields of view lie strictly inside (0, pi).
        void validate() const;

        /// Pose whose view matches the given cube face at 90 degree field of view.
        static CameraPose for_face(FaceId f);
};

LonLat direction_to_lonlat(const Direction& d);
Direction lonlat_to_direction(const LonLat& c);

const FaceFrame& face_basis(FaceId f);

Direction face_coord_to_direction(const FaceCoord& fc);
FaceCoord direction_to_face_coord(const Direction& d);

/// Unnormalized world vector for a face coordinate; callers that only need a ray can skip the sqrt.
Vec3 face_point(const FaceCoord& fc);

/// Camera-to-world rotation columns for a pose: yaw about world Y, then pitch about camera X,
/// then roll about camera Z.
FaceFrame camera_frame(const CameraPose& cam);

struct FrustumHit
{
        /// Normalized pixel coordinates in [0,1]^2, x to the right and y down.
        double px = 0;
        double py = 0;
};

/// Pinhole test: returns the normalized image position when d projects inside the frustum.
std::optional<FrustumHit> direction_in_frustum(const Direction& d, const CameraPose& cam);

}
