#include <vpk/fusion.hpp>
#include <vpk/viewpoint.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace vpk
{
namespace
{
// A subregion lives on the unfolded cube net around its central face: the central face is
// [-1,1]^2 in (u right, v up), each neighbour quarter is unfolded rigidly about the shared edge,
// and the whole subregion is the diamond |u| + |v| <= 2. The tile shows that diamond turned 45
// degrees; these are the tile directions (column, row) of the net u and v axes.
struct NetAxes
{
        int ux, uy;
        int vx, vy;
};

// Indexed F, R, B, L. F: L top-left, R bottom-right, U top-right, D bottom-left.
constexpr std::array<NetAxes, 4> kNetAxes{{
        {1, 1, 1, -1},   // F
        {-1, 1, 1, 1},   // R
        {-1, -1, -1, 1}, // B
        {1, -1, -1, -1}, // L
}};

// 2x2 grid [L F / B R]; with the axes above every D corner already faces the map centre.
constexpr std::array<CellPlacement, 4> kPlacement{{
        {0, 1, 0}, // F
        {1, 1, 0}, // R
        {1, 0, 0}, // B
        {0, 0, 0}, // L
}};

struct Net
{
        double u = 0;
        double v = 0;
};

const NetAxes& axes(FaceId sub)
{
        return kNetAxes[subregion_index(sub)];
}

Net tile_to_net(FaceId sub, double i, double j, int s)
{
        const NetAxes& a = axes(sub);
        const double x = j - s / 2.0;
        const double y = i - s / 2.0;
        return {(a.ux * x + a.uy * y) * 2.0 / s, (a.vx * x + a.vy * y) * 2.0 / s};
}

SubregionCoord net_to_tile(FaceId sub, const Net& p, int s)
{
        const NetAxes& a = axes(sub);
        const double x = s / 4.0 * (p.u * a.ux + p.v * a.vx);
        const double y = s / 4.0 * (p.u * a.uy + p.v * a.vy);
        return {sub, s / 2.0 + y, s / 2.0 + x};
}

Piece classify_net(const Net& p)
{
        if (p.v > 1)
        {
                return Piece::Up;
        }
        if (p.v < -1)
        {
                return Piece::Down;
        }
        if (p.u > 1)
        {
                return Piece::Right;
        }
        if (p.u < -1)
        {
                return Piece::Left;
        }
        return Piece::Central;
}

double extent_unchecked(double theta, double a)
{
        return a / (std::sin(theta) + std::abs(std::cos(theta)));
}

// Net point inside the U triangle -> unwarped net point on the U semicircle.
Net unwarp_up(const Net& p)
{
        const double x = p.u;
        const double y = p.v - 1;
        const double r_star = std::hypot(x, y);
        if (r_star == 0)
        {
                return p;
        }
        const double theta = std::atan2(y, x);
        const double scale = 1.0 / extent_unchecked(theta, 1.0);
        return {x * scale, 1 + y * scale};
}

// Unwarped semicircle point (relative to the edge midpoint) -> triangle net point.
Net warp_up(double x, double y)
{
        const double r = std::hypot(x, y);
        if (r == 0)
        {
                return {0, 1};
        }
        const double scale = extent_unchecked(std::atan2(y, x), 1.0);
        return {x * scale, 1 + y * scale};
}

Vec3 net_to_cube(FaceId sub, const Net& p)
{
        const FaceFrame& fr = face_basis(sub);
        switch (classify_net(p))
        {
        case Piece::Central:
                return fr.normal + fr.right * p.u + fr.up * p.v;
        case Piece::Right:
                return fr.normal * (2 - p.u) + fr.right + fr.up * p.v;
        case Piece::Left:
                return fr.normal * (2 + p.u) - fr.right + fr.up * p.v;
        case Piece::Down:
                return fr.normal * (2 + p.v) + fr.right * p.u - fr.up;
        case Piece::Up:
        {
                const Net q = unwarp_up(p);
                return fr.normal * (2 - q.v) + fr.right * q.u + fr.up;
        }
        }
        return fr.normal;
}

// Point on the U face given in the subregion frame, scaled so its up component is 1:
// a = normal component, b = right component.
std::optional<Net> u_semicircle_to_net(double a, double b)
{
        const double x = b;
        const double y = 1 - a;
        if (y < 0 || std::hypot(x, y) > 1)
        {
                return std::nullopt;
        }
        return warp_up(x, y);
}

std::optional<Net> direction_to_net(FaceId sub, const Direction& d)
{
        const FaceFrame& fr = face_basis(sub);
        const double a = dot(d.vec(), fr.normal);
        const double b = dot(d.vec(), fr.right);
        const double c = dot(d.vec(), fr.up);
        const double ab = std::abs(b);
        const double ac = std::abs(c);

        if (a >= ab && a >= ac)
        {
                return Net{b / a, c / a};
        }
        if (ac >= ab && ac >= std::abs(a))
        {
                const double an = a / ac;
                const double bn = b / ac;
                if (c > 0)
                {
                        return u_semicircle_to_net(an, bn);
                }
                if (an >= 0 && std::abs(bn) <= an)
                {
                        return Net{bn, -(2 - an)};
                }
                return std::nullopt;
        }
        const double an = a / ab;
        const double cn = c / ab;
        if (an >= 0 && std::abs(cn) <= an)
        {
                return Net{b > 0 ? 2 - an : -(2 - an), cn};
        }
        return std::nullopt;
}

std::array<double, 2> net_up_to_u_face(FaceId sub, const Net& p)
{
        const Net q = unwarp_up(p);
        const FaceFrame& fr = face_basis(sub);
        const FaceFrame& up = face_basis(FaceId::U);
        const Vec3 pt = fr.normal * (2 - q.v) + fr.right * q.u + fr.up;
        return {dot(pt, up.right), dot(pt, up.up)};
}

double entry_weight(FaceId sub, const Net& p, int n)
{
        const Piece piece = classify_net(p);
        if (piece == Piece::Up)
        {
                const auto q = net_up_to_u_face(sub, p);
                const auto own = semicircle_center_on_u(sub);
                for (FaceId nb : horizontal_neighbors(sub))
                {
                        const auto c = semicircle_center_on_u(nb);
                        if (std::hypot(q[0] - c[0], q[1] - c[1]) < 1)
                        {
                                return petal_weight(own, c, q);
                        }
                }
                return 1;
        }
        if (piece != Piece::Down && std::abs(p.u) >= std::abs(p.v))
        {
                return rhombus_weight(n, 2 - std::abs(p.u));
        }
        return 1;
}

// Continuous tile coordinate -> map coordinate for a tile turned k quarter turns clockwise.
void rotate_cw(double& i, double& j, int k, int s)
{
        for (int t = 0; t < (k % 4 + 4) % 4; ++t)
        {
                const double ni = j;
                const double nj = s - i;
                i = ni;
                j = nj;
        }
}

}

std::array<FaceId, 2> horizontal_neighbors(FaceId sub)
{
        switch (sub)
        {
        case FaceId::F:
                return {FaceId::L, FaceId::R};
        case FaceId::R:
                return {FaceId::F, FaceId::B};
        case FaceId::B:
                return {FaceId::R, FaceId::L};
        case FaceId::L:
                return {FaceId::B, FaceId::F};
        default:
                throw DomainError("only horizontal faces have subregions");
        }
}

ViewPointLayout::ViewPointLayout(int n) : n_(n)
{
        if (n < 2)
        {
                throw DomainError("ViewPoint quadrant side must be at least 2, got " + std::to_string(n));
        }
}

double ViewPointLayout::central_face_side() const
{
        return subregion_side() / std::sqrt(2.0);
}

const CellPlacement& ViewPointLayout::placement(FaceId sub)
{
        if (!is_horizontal(sub))
        {
                throw DomainError("only horizontal faces have subregions");
        }
        return kPlacement[subregion_index(sub)];
}

ViewPointImage::ViewPointImage(ImageBuffer buffer, ViewPointLayout layout)
        : buffer_(std::move(buffer)), layout_(layout)
{
        if (buffer_.width() != layout_.map_side() || buffer_.height() != layout_.map_side())
        {
                throw ShapeMismatch("ViewPoint map must be " + std::to_string(layout_.map_side()) + " square, got " +
                                    std::to_string(buffer_.width()) + "x" + std::to_string(buffer_.height()));
        }
}

ImageBuffer ViewPointImage::tile(FaceId sub) const
{
        const int s = layout_.subregion_side();
        const CellPlacement& pl = ViewPointLayout::placement(sub);
        ImageBuffer t = buffer_.crop(pl.cell_col * s, pl.cell_row * s, s, s);
        for (int k = 0; k < pl.quarter_turns % 4; ++k)
        {
                t = rotate_minus90(t);
        }
        return t;
}

void ViewPointImage::set_tile(FaceId sub, const ImageBuffer& tile)
{
        const int s = layout_.subregion_side();
        const CellPlacement& pl = ViewPointLayout::placement(sub);
        if (tile.width() != s || tile.height() != s || tile.channels() != buffer_.channels())
        {
                throw ShapeMismatch("tile shape does not match the layout");
        }
        ImageBuffer t = tile;
        for (int k = 0; k < pl.quarter_turns % 4; ++k)
        {
                t = rotate90(t);
        }
        buffer_.paste(t, pl.cell_col * s, pl.cell_row * s);
}

std::array<ImageBuffer, 4> ViewPointImage::tiles() const
{
        std::array<ImageBuffer, 4> out;
        for (FaceId sub : kSubregions)
        {
                out[subregion_index(sub)] = tile(sub);
        }
        return out;
}

double triangle_extent(double theta, double a)
{
        if (!(theta >= 0 && theta <= kPi))
        {
                throw DomainError("polar angle outside [0, pi]");
        }
        return extent_unchecked(theta, a);
}

PolarPoint semicircle_to_triangle(double r, double theta, double a)
{
        if (!(a > 0))
        {
                throw DomainError("semicircle radius must be positive");
        }
        if (!(r >= 0 && r <= a))
        {
                throw DomainError("radius outside [0, a]");
        }
        return {r * triangle_extent(theta, a) / a, theta};
}

PolarPoint triangle_to_semicircle(double r_star, double theta, double a)
{
        if (!(a > 0))
        {
                throw DomainError("semicircle radius must be positive");
        }
        const double d = triangle_extent(theta, a);
        if (!(r_star >= 0 && r_star <= d))
        {
                throw DomainError("point outside the triangle");
        }
        return {r_star * a / d, theta};
}

Piece classify(const SubregionCoord& sc, const ViewPointLayout& layout)
{
        return classify_net(tile_to_net(sc.sub, sc.i, sc.j, layout.subregion_side()));
}

Direction subregion_coord_to_direction(const SubregionCoord& sc, const ViewPointLayout& layout)
{
        return Direction(net_to_cube(sc.sub, tile_to_net(sc.sub, sc.i, sc.j, layout.subregion_side())));
}

VpPixelSource direction_to_subregion_coords(const Direction& d, const ViewPointLayout& layout)
{
        const int s = layout.subregion_side();
        std::array<VpPixelSource::Entry, 4> found{};
        int count = 0;
        for (FaceId sub : kSubregions)
        {
                if (const auto p = direction_to_net(sub, d))
                {
                        found[count++] = {net_to_tile(sub, *p, s), entry_weight(sub, *p, layout.n())};
                }
        }
        // More than two only on measure-zero boundaries such as the U face centre.
        if (count > 2)
        {
                std::stable_sort(found.begin(), found.begin() + count,
                                 [](const auto& a, const auto& b) { return a.weight > b.weight; });
                count = 2;
        }
        VpPixelSource out;
        double total = 0;
        for (int k = 0; k < count; ++k)
        {
                total += found[k].weight;
        }
        for (int k = 0; k < count; ++k)
        {
                out.entries[k] = found[k];
                out.entries[k].weight = total > 0 ? found[k].weight / total : 1.0 / count;
        }
        out.count = count;
        return out;
}

SubregionCoord map_to_subregion(double x, double y, const ViewPointLayout& layout)
{
        const int s = layout.subregion_side();
        const int col = std::clamp(static_cast<int>(std::floor(x / s)), 0, 1);
        const int row = std::clamp(static_cast<int>(std::floor(y / s)), 0, 1);
        for (FaceId sub : kSubregions)
        {
                const CellPlacement& pl = ViewPointLayout::placement(sub);
                if (pl.cell_row == row && pl.cell_col == col)
                {
                        double i = y - row * s;
                        double j = x - col * s;
                        rotate_cw(i, j, -pl.quarter_turns, s);
                        return {sub, i, j};
                }
        }
        throw DomainError("placement table does not cover the map");
}

PixelPos subregion_to_map(const SubregionCoord& sc, const ViewPointLayout& layout)
{
        const int s = layout.subregion_side();
        const CellPlacement& pl = ViewPointLayout::placement(sc.sub);
        double i = sc.i;
        double j = sc.j;
        rotate_cw(i, j, pl.quarter_turns, s);
        return {pl.cell_col * s + j, pl.cell_row * s + i};
}

Direction viewpoint_pixel_to_direction(double x, double y, const ViewPointLayout& layout)
{
        return subregion_coord_to_direction(map_to_subregion(x, y, layout), layout);
}

PixelToDirection viewpoint_target(const ViewPointLayout& layout)
{
        return [layout](double x, double y) { return viewpoint_pixel_to_direction(x, y, layout); };
}

std::array<double, 2> semicircle_center_on_u(FaceId sub)
{
        const FaceFrame& up = face_basis(FaceId::U);
        const Vec3& nrm = face_basis(sub).normal;
        return {dot(nrm, up.right), dot(nrm, up.up)};
}

std::optional<SubregionCoord> u_face_to_subregion(FaceId sub, double u, double v, const ViewPointLayout& layout)
{
        const FaceFrame& up = face_basis(FaceId::U);
        const FaceFrame& fr = face_basis(sub);
        const Vec3 pt = up.normal + up.right * u + up.up * v;
        const auto p = u_semicircle_to_net(dot(pt, fr.normal), dot(pt, fr.right));
        if (!p)
        {
                return std::nullopt;
        }
        return net_to_tile(sub, *p, layout.subregion_side());
}

TapSet ViewPointGeometry::locate(const Direction& d) const
{
        const VpPixelSource src = direction_to_subregion_coords(d, layout_);
        TapSet t;
        if (src.count == 0)
        {
                return t;
        }
        auto to_tap = [](const VpPixelSource::Entry& e, double w) {
                return Tap{subregion_index(e.coord.sub), e.coord.j, e.coord.i, w};
        };
        if (fuse_)
        {
                for (int k = 0; k < src.count; ++k)
                {
                        t.push(to_tap(src.entries[k], src.entries[k].weight));
                }
                return t;
        }
        int best = 0;
        for (int k = 1; k < src.count; ++k)
        {
                if (src.entries[k].weight > src.entries[best].weight)
                {
                        best = k;
                }
        }
        t.push(to_tap(src.entries[best], 1.0));
        return t;
}

ViewPointImage render_viewpoint(const SourceGeometry& geometry, std::span<const ImageBuffer> planes,
                                const ViewPointLayout& layout, int threads)
{
        const int side = layout.map_side();
        const RemapTable table = build_remap(side, side, viewpoint_target(layout), geometry, threads);
        return ViewPointImage(apply_remap(table, planes, threads), layout);
}

ViewPointImage erp_to_viewpoint(const ErpImage& erp, const ViewPointLayout& layout, int threads)
{
        const std::array<ImageBuffer, 1> planes{erp.buffer()};
        return render_viewpoint(ErpGeometry(erp.dims()), planes, layout, threads);
}

ViewPointImage cubemap_to_viewpoint(const CubemapImage& cm, const ViewPointLayout& layout, int threads)
{
        return render_viewpoint(CubemapGeometry(cm.face_side()), cm.planes(), layout, threads);
}

ErpImage reconstruct_erp(const ViewPointImage& vp, ImageDims out, bool fuse, int threads)
{
        const auto tiles = vp.tiles();
        return resample_to_erp(ViewPointGeometry(vp.layout(), fuse), tiles, out, threads);
}

ConditionMaps project_condition(const ViewPointLayout& layout, const CameraPose& cam, const ImageBuffer& frame,
                                int threads)
{
        cam.validate();
        if (frame.empty())
        {
                throw ShapeMismatch("condition frame is empty");
        }
        const int side = layout.map_side();
        ImageBuffer cond(side, side, frame.channels(), frame.colorspace());
        ImageBuffer mask(side, side, 1, ColorSpace::Linear);
        parallel_rows(side, threads, [&](int y) {
                for (int x = 0; x < side; ++x)
                {
                        const Direction d = viewpoint_pixel_to_direction(x + 0.5, y + 0.5, layout);
                        if (const auto hit = direction_in_frustum(d, cam))
                        {
                                sample_bilinear(frame, hit->px * frame.width(), hit->py * frame.height(), false,
                                                cond.pixel(x, y));
                                mask.at(x, y, 0) = 1.0f;
                        }
                }
        });
        return {ViewPointImage(std::move(cond), layout), ViewPointImage(std::move(mask), layout)};
}

}
