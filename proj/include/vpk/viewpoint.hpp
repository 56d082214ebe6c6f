#pragma once

#include <vpk/cubemap.hpp>
#include <vpk/erp.hpp>
#include <vpk/image.hpp>
#include <vpk/source.hpp>
#include <vpk/sphere.hpp>

#include <array>
#include <optional>

namespace vpk
{
/// Subregions are named by their central face; the four horizontal faces.
inline constexpr std::array<FaceId, 4> kSubregions{FaceId::F, FaceId::R, FaceId::B, FaceId::L};

inline constexpr int subregion_index(FaceId sub)
{
        return static_cast<int>(sub);
}

/// Horizontal neighbours of a central face: [0] to its left, [1] to its right.
std::array<FaceId, 2> horizontal_neighbors(FaceId sub);

struct CellPlacement
{
        int cell_row = 0;
        int cell_col = 0;
        /// Clockwise quarter turns applied to the subregion tile when it is placed in the map.
        int quarter_turns = 0;
};

/// Resolution of a ViewPoint map: quadrant side n, subregion side s = 2n, map side 2s.
class ViewPointLayout
{
public:
        /// Throws DomainError for n < 2.
        explicit ViewPointLayout(int n);

        int n() const { return n_; }
        int subregion_side() const { return 2 * n_; }
        int map_side() const { return 4 * n_; }
        /// Central face side in pixels, s / sqrt(2).
        double central_face_side() const;

        static const CellPlacement& placement(FaceId sub);

        bool operator==(const ViewPointLayout&) const = default;

private:
        int n_;
};

/// Continuous (row, column) coordinates in [0, s]^2 inside one subregion tile.
struct SubregionCoord
{
        FaceId sub = FaceId::F;
        double i = 0;
        double j = 0;
};

struct VpPixelSource
{
        struct Entry
        {
                SubregionCoord coord;
                double weight = 1;
        };

        std::array<Entry, 2> entries{};
        int count = 0;
};

/// Which part of a subregion a coordinate falls in.
enum class Piece
{
        Central,
        Left,
        Right,
        Up,
        Down
};

class ViewPointImage
{
public:
        ViewPointImage(ImageBuffer buffer, ViewPointLayout layout);

        const ImageBuffer& buffer() const { return buffer_; }
        ImageBuffer& buffer() { return buffer_; }
        const ViewPointLayout& layout() const { return layout_; }

        /// Subregion tile in its own orientation (placement rotation undone).
        ImageBuffer tile(FaceId sub) const;
        void set_tile(FaceId sub, const ImageBuffer& tile);
        /// Tiles indexed by subregion_index.
        std::array<ImageBuffer, 4> tiles() const;

private:
        ImageBuffer buffer_;
        ViewPointLayout layout_;
};

struct PolarPoint
{
        double r = 0;
        double theta = 0;
};

/// Distance from the semicircle centre to the triangle boundary along theta, for radius a.
double triangle_extent(double theta, double a);

/// Radial rescale of a point on the half-disk of radius a onto the right isosceles triangle
/// with hypotenuse 2a on the theta = 0/pi axis. Throws DomainError outside the half-disk.
PolarPoint semicircle_to_triangle(double r, double theta, double a);

/// Inverse of semicircle_to_triangle. Throws DomainError outside the triangle.
PolarPoint triangle_to_semicircle(double r_star, double theta, double a);

Piece classify(const SubregionCoord& sc, const ViewPointLayout& layout);

Direction subregion_coord_to_direction(const SubregionCoord& sc, const ViewPointLayout& layout);

/// Every subregion holding d, with blend weights summing to one.
VpPixelSource direction_to_subregion_coords(const Direction& d, const ViewPointLayout& layout);

/// Map pixel coordinates (x right, y down) to subregion coordinates and back.
SubregionCoord map_to_subregion(double x, double y, const ViewPointLayout& layout);
PixelPos subregion_to_map(const SubregionCoord& sc, const ViewPointLayout& layout);

Direction viewpoint_pixel_to_direction(double x, double y, const ViewPointLayout& layout);

PixelToDirection viewpoint_target(const ViewPointLayout& layout);

/// Coordinates of the U-face semicircle centre (shared edge midpoint) of a subregion, in U face (u, v).
std::array<double, 2> semicircle_center_on_u(FaceId sub);

/// Tile coordinates of a U face point inside the subregion's semicircle, if it lies there.
std::optional<SubregionCoord> u_face_to_subregion(FaceId sub, double u, double v, const ViewPointLayout& layout);

/// Planes are the four tiles from ViewPointImage::tiles().
class ViewPointGeometry final : public SourceGeometry
{
public:
        ViewPointGeometry(ViewPointLayout layout, bool fuse) : layout_(layout), fuse_(fuse) { }

        TapSet locate(const Direction& d) const override;
        int plane_count() const override { return 4; }
        bool wraps(int) const override { return false; }

private:
        ViewPointLayout layout_;
        bool fuse_;
};

ViewPointImage render_viewpoint(const SourceGeometry& geometry, std::span<const ImageBuffer> planes,
                                const ViewPointLayout& layout, int threads = 1);
ViewPointImage erp_to_viewpoint(const ErpImage& erp, const ViewPointLayout& layout, int threads = 1);
ViewPointImage cubemap_to_viewpoint(const CubemapImage& cm, const ViewPointLayout& layout, int threads = 1);

/// With fuse set, overlapping samples are blended by their weights; otherwise the heaviest wins.
ErpImage reconstruct_erp(const ViewPointImage& vp, ImageDims out, bool fuse, int threads = 1);

struct ConditionMaps
{
        ViewPointImage condition;
        ViewPointImage mask;
};

/// Projects a perspective frame into the map: frame samples where the camera sees, zero elsewhere,
/// plus a binary single-channel mask.
ConditionMaps project_condition(const ViewPointLayout& layout, const CameraPose& cam, const ImageBuffer& frame,
                                int threads = 1);

}
