#pragma once

#include <vpk/cubemap.hpp>
#include <vpk/image.hpp>
#include <vpk/sphere.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vpk
{
class IoError : public std::runtime_error
{
public:
        using std::runtime_error::runtime_error;
};

/// 8-bit PNG. Gray images load as single-channel linear (masks), colour images as sRGB-tagged;
/// gray+alpha is expanded to RGBA.
ImageBuffer read_png(const std::filesystem::path& path);

/// Quantizes stored values (clamped to [0,1]) to 8 bits. Written to a temporary file in the
/// target directory and renamed into place.
void write_png(const std::filesystem::path& path, const ImageBuffer& img);

/// Writes bytes to path via a temporary sibling and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

/// Sidecar for a ViewPoint PNG: same stem, .json extension, {"n": n, "layout_version": 1}.
std::filesystem::path viewpoint_sidecar_path(const std::filesystem::path& png);
void write_viewpoint_sidecar(const std::filesystem::path& png, int n);
std::optional<int> read_viewpoint_sidecar(const std::filesystem::path& png);

/// Directory of F.png .. D.png.
void write_cubemap_dir(const std::filesystem::path& dir, const CubemapImage& cm);
/// Reads a face directory or a 3:2 atlas PNG.
CubemapImage read_cubemap(const std::filesystem::path& path);

enum class Representation
{
        Erp,
        Cubemap,
        Viewpoint,
        Perspective
};

std::string representation_name(Representation r);
std::optional<Representation> representation_from_name(const std::string& name);

struct PoseDegrees
{
        double yaw = 0;
        double pitch = 0;
        double roll = 0;
        double hfov = 90;
        double vfov = 90;

        CameraPose to_pose() const;
};

/// manifest.json of a frame sequence directory.
struct Manifest
{
        static constexpr int kSchema = 1;

        Representation representation = Representation::Erp;
        int frames = 0;
        double fps = 0;
        int width = 0;
        int height = 0;
        std::optional<int> n;
        std::optional<int> face_side;
        /// Optional per-frame camera poses for mask projection.
        std::vector<PoseDegrees> poses;
};

inline constexpr const char* kManifestName = "manifest.json";

bool is_sequence_dir(const std::filesystem::path& p);
Manifest read_manifest(const std::filesystem::path& dir);
std::string manifest_to_json(const Manifest& m);
void write_manifest(const std::filesystem::path& dir, const Manifest& m);

/// Zero-padded frame file name (000000.png); cubemap frames are directories of the same stem.
std::string frame_name(int index, bool directory = false);

}
