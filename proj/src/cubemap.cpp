#include <vpk/cubemap.hpp>

#include <cmath>

namespace vpk
{
namespace
{
constexpr std::array<std::array<FaceId, 3>, 2> kAtlasRows{{{FaceId::F, FaceId::R, FaceId::B},
                                                           {FaceId::L, FaceId::U, FaceId::D}}};
}

CubemapImage::CubemapImage(std::array<ImageBuffer, 6> faces) : faces_(std::move(faces))
{
        const ImageBuffer& f0 = faces_[0];
        if (f0.empty() || f0.width() != f0.height())
        {
                throw ShapeMismatch("cubemap faces must be square and non-empty");
        }
        for (const auto& f : faces_)
        {
                if (!f.same_shape(f0) || f.colorspace() != f0.colorspace())
                {
                        throw ShapeMismatch("cubemap faces must share side, channels and color space");
                }
        }
}

Direction face_pixel_to_direction(FaceId f, int side, double x, double y)
{
        return face_coord_to_direction({f, 2 * x / side - 1, 1 - 2 * y / side});
}

TapSet CubemapGeometry::locate(const Direction& d) const
{
        const FaceCoord fc = direction_to_face_coord(d);
        TapSet t;
        t.push({static_cast<int>(fc.face), (fc.u + 1) / 2 * side_, (1 - fc.v) / 2 * side_, 1.0});
        return t;
}

CubemapImage erp_to_cubemap(const ErpImage& erp, int face_side, int threads)
{
        if (face_side < 2)
        {
                throw ShapeMismatch("cube face side must be at least 2");
        }
        const ErpGeometry geometry(erp.dims());
        const std::array<ImageBuffer, 1> planes{erp.buffer()};
        std::array<ImageBuffer, 6> faces;
        for (FaceId f : kAllFaces)
        {
                const PixelToDirection target = [f, face_side](double x, double y) {
                        return face_pixel_to_direction(f, face_side, x, y);
                };
                const RemapTable table = build_remap(face_side, face_side, target, geometry, threads);
                faces[static_cast<int>(f)] = apply_remap(table, planes, threads);
        }
        return CubemapImage(std::move(faces));
}

ErpImage cubemap_to_erp(const CubemapImage& cm, ImageDims out, int threads)
{
        return resample_to_erp(CubemapGeometry(cm.face_side()), cm.planes(), out, threads);
}

PixelToDirection perspective_target(const CameraPose& cam, ImageDims dims)
{
        cam.validate();
        const FaceFrame fr = camera_frame(cam);
        const double tx = std::tan(cam.hfov / 2);
        const double ty = std::tan(cam.vfov / 2);
        return [fr, tx, ty, dims](double x, double y) {
                const double xn = (2 * x / dims.width - 1) * tx;
                const double yn = (1 - 2 * y / dims.height) * ty;
                return Direction(fr.normal + fr.right * xn + fr.up * yn);
        };
}

ImageBuffer extract_perspective(const SourceGeometry& geometry, std::span<const ImageBuffer> planes,
                                const CameraPose& cam, ImageDims out, int threads)
{
        const RemapTable table = build_remap(out.width, out.height, perspective_target(cam, out), geometry, threads);
        return apply_remap(table, planes, threads);
}

ImageBuffer cubemap_to_atlas(const CubemapImage& cm)
{
        const int a = cm.face_side();
        const ImageBuffer& f0 = cm.face(FaceId::F);
        ImageBuffer atlas(3 * a, 2 * a, f0.channels(), f0.colorspace());
        for (int r = 0; r < 2; ++r)
        {
                for (int c = 0; c < 3; ++c)
                {
                        atlas.paste(cm.face(kAtlasRows[r][c]), c * a, r * a);
                }
        }
        return atlas;
}

CubemapImage cubemap_from_atlas(const ImageBuffer& atlas)
{
        if (atlas.width() % 3 != 0 || atlas.height() % 2 != 0 || atlas.width() / 3 != atlas.height() / 2)
        {
                throw ShapeMismatch("cubemap atlas must be 3:2 with square cells");
        }
        const int a = atlas.height() / 2;
        std::array<ImageBuffer, 6> faces;
        for (int r = 0; r < 2; ++r)
        {
                for (int c = 0; c < 3; ++c)
                {
                        faces[static_cast<int>(kAtlasRows[r][c])] = atlas.crop(c * a, r * a, a, a);
                }
        }
        return CubemapImage(std::move(faces));
}

}
