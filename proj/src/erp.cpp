#include <vpk/erp.hpp>

#include <cmath>
#include <string>

namespace vpk
{
void ErpImage::check_dims(ImageDims dims)
{
        if (dims.height <= 0 || dims.width != 2 * dims.height)
        {
                throw ShapeMismatch("equirectangular image must be 2:1, got " + std::to_string(dims.width) + "x" +
                                    std::to_string(dims.height));
        }
}

ErpImage::ErpImage(ImageBuffer buffer) : buffer_(std::move(buffer))
{
        check_dims(dims());
}

Direction erp_pixel_to_direction(ImageDims dims, double x, double y)
{
        const double lon = (x / dims.width - 0.5) * 2 * kPi;
        const double lat = (0.5 - y / dims.height) * kPi;
        const double cl = std::cos(lat);
        return Direction::from_unit({cl * std::sin(lon), std::sin(lat), cl * std::cos(lon)});
}

PixelPos direction_to_erp_pixel(const Direction& d, ImageDims dims)
{
        const double h = std::hypot(d.x(), d.z());
        const double lon = h > 0 ? std::atan2(d.x(), d.z()) : 0.0;
        const double lat = std::atan2(d.y(), h);
        double x = (lon / (2 * kPi) + 0.5) * dims.width;
        if (x >= dims.width)
        {
                x -= dims.width;
        }
        if (x < 0)
        {
                x += dims.width;
        }
        return {x, (0.5 - lat / kPi) * dims.height};
}

TapSet ErpGeometry::locate(const Direction& d) const
{
        const PixelPos p = direction_to_erp_pixel(d, dims_);
        TapSet t;
        t.push({0, p.x, p.y, 1.0});
        return t;
}

PixelToDirection erp_target(ImageDims dims)
{
        return [dims](double x, double y) { return erp_pixel_to_direction(dims, x, y); };
}

ErpImage resample_to_erp(const SourceGeometry& geometry, std::span<const ImageBuffer> planes, ImageDims out,
                         int threads)
{
        ErpImage::check_dims(out);
        const RemapTable table = build_remap(out.width, out.height, erp_target(out), geometry, threads);
        return ErpImage(apply_remap(table, planes, threads));
}

}
