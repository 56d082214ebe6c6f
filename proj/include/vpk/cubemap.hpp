#pragma once

#include <vpk/erp.hpp>
#include <vpk/image.hpp>
#include <vpk/source.hpp>
#include <vpk/sphere.hpp>

#include <array>

namespace vpk
{
/// Six square faces of equal side, indexed by FaceId.
class CubemapImage
{
public:
        CubemapImage() = default;
        explicit CubemapImage(std::array<ImageBuffer, 6> faces);

        int face_side() const { return faces_[0].width(); }
        const ImageBuffer& face(FaceId f) const { return faces_[static_cast<int>(f)]; }
        ImageBuffer& face(FaceId f) { return faces_[static_cast<int>(f)]; }
        std::span<const ImageBuffer> planes() const { return faces_; }

private:
        std::array<ImageBuffer, 6> faces_;
};

Direction face_pixel_to_direction(FaceId f, int side, double x, double y);

class CubemapGeometry final : public SourceGeometry
{
public:
        explicit CubemapGeometry(int face_side) : side_(face_side) { }

        TapSet locate(const Direction& d) const override;
        int plane_count() const override { return 6; }
        bool wraps(int) const override { return false; }

private:
        int side_;
};

CubemapImage erp_to_cubemap(const ErpImage& erp, int face_side, int threads = 1);
ErpImage cubemap_to_erp(const CubemapImage& cm, ImageDims out, int threads = 1);

PixelToDirection perspective_target(const CameraPose& cam, ImageDims dims);

/// Pinhole render of any source.
ImageBuffer extract_perspective(const SourceGeometry& geometry, std::span<const ImageBuffer> planes,
                                const CameraPose& cam, ImageDims out, int threads = 1);

/// 3:2 atlas with rows [F R B / L U D].
ImageBuffer cubemap_to_atlas(const CubemapImage& cm);
CubemapImage cubemap_from_atlas(const ImageBuffer& atlas);

}
