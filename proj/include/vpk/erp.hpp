#pragma once

#include <vpk/image.hpp>
#include <vpk/source.hpp>
#include <vpk/sphere.hpp>

namespace vpk
{
struct ImageDims
{
        int width = 0;
        int height = 0;
};

struct PixelPos
{
        double x = 0;
        double y = 0;
};

/// Equirectangular panorama: width = 2 * height, column 0 at lon = -pi, row 0 at the north pole.
class ErpImage
{
public:
        ErpImage() = default;
        /// Throws ShapeMismatch unless width == 2 * height.
        explicit ErpImage(ImageBuffer buffer);

        const ImageBuffer& buffer() const { return buffer_; }
        ImageBuffer& buffer() { return buffer_; }
        ImageDims dims() const { return {buffer_.width(), buffer_.height()}; }

        static void check_dims(ImageDims dims);

private:
        ImageBuffer buffer_;
};

Direction erp_pixel_to_direction(ImageDims dims, double x, double y);

/// Exact inverse of erp_pixel_to_direction; x lands in [0, width).
PixelPos direction_to_erp_pixel(const Direction& d, ImageDims dims);

class ErpGeometry final : public SourceGeometry
{
public:
        explicit ErpGeometry(ImageDims dims) : dims_(dims) { }

        TapSet locate(const Direction& d) const override;
        int plane_count() const override { return 1; }
        bool wraps(int) const override { return true; }

private:
        ImageDims dims_;
};

PixelToDirection erp_target(ImageDims dims);

/// Renders an ERP of the given dimensions from any source with a direction lookup.
ErpImage resample_to_erp(const SourceGeometry& geometry, std::span<const ImageBuffer> planes, ImageDims out,
                         int threads = 1);

}
