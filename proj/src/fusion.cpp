#include <vpk/fusion.hpp>
#include <vpk/viewpoint.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vpk
{
Matrix identity_matrix(int n)
{
        Matrix m(n);
        for (int i = 0; i < n; ++i)
        {
                m(i, i) = 1;
        }
        return m;
}

Matrix exchange_matrix(int n)
{
        Matrix m(n);
        for (int i = 0; i < n; ++i)
        {
                m(i, n - 1 - i) = 1;
        }
        return m;
}

Matrix transpose(const Matrix& a)
{
        Matrix t(a.size());
        for (int i = 0; i < a.size(); ++i)
        {
                for (int j = 0; j < a.size(); ++j)
                {
                        t(j, i) = a(i, j);
                }
        }
        return t;
}

Matrix multiply(const Matrix& a, const Matrix& b)
{
        if (a.size() != b.size())
        {
                throw ShapeMismatch("matrix sizes differ");
        }
        const int n = a.size();
        Matrix c(n);
        for (int i = 0; i < n; ++i)
        {
                for (int k = 0; k < n; ++k)
                {
                        const double aik = a(i, k);
                        if (aik == 0)
                        {
                                continue;
                        }
                        for (int j = 0; j < n; ++j)
                        {
                                c(i, j) += aik * b(k, j);
                        }
                }
        }
        return c;
}

Matrix rotate90(const Matrix& a)
{
        return multiply(transpose(a), exchange_matrix(a.size()));
}

Matrix rotate_minus90(const Matrix& a)
{
        return multiply(exchange_matrix(a.size()), transpose(a));
}

Matrix rotate180(const Matrix& a)
{
        const Matrix j = exchange_matrix(a.size());
        return multiply(multiply(j, a), j);
}

namespace
{
template <typename Src>
ImageBuffer permute_tile(const ImageBuffer& tile, Src src)
{
        if (tile.width() != tile.height())
        {
                throw ShapeMismatch("tile rotation needs a square tile");
        }
        const int s = tile.width();
        ImageBuffer out(s, s, tile.channels(), tile.colorspace());
        for (int i = 0; i < s; ++i)
        {
                for (int j = 0; j < s; ++j)
                {
                        const auto [si, sj] = src(i, j, s);
                        const auto from = tile.pixel(sj, si);
                        std::copy(from.begin(), from.end(), out.pixel(j, i).begin());
                }
        }
        return out;
}

struct Index2
{
        int i;
        int j;
};
}

ImageBuffer rotate90(const ImageBuffer& tile)
{
        return permute_tile(tile, [](int i, int j, int s) { return Index2{s - 1 - j, i}; });
}

ImageBuffer rotate_minus90(const ImageBuffer& tile)
{
        return permute_tile(tile, [](int i, int j, int s) { return Index2{j, s - 1 - i}; });
}

ImageBuffer rotate180(const ImageBuffer& tile)
{
        return permute_tile(tile, [](int i, int j, int s) { return Index2{s - 1 - i, s - 1 - j}; });
}

FusionWeights::FusionWeights(int n_) : n(n_)
{
        if (n < 2)
        {
                throw ShapeMismatch("fusion weights need n >= 2");
        }
        w = Matrix(n);
        for (int i = 1; i <= n; ++i)
        {
                for (int j = 1; j <= n; ++j)
                {
                        w(i - 1, j - 1) = static_cast<double>(i + j - 2) / (2.0 * (n - 1));
                }
        }
        r90 = rotate90(w);
        r_minus90 = rotate_minus90(w);
        r180 = rotate180(w);
}

double rhombus_weight(int n, double depth)
{
        return std::clamp((n * depth - 1) / (2.0 * (n - 1)), 0.0, 1.0);
}

double petal_weight(std::array<double, 2> own_center, std::array<double, 2> other_center, std::array<double, 2> q)
{
        const double ax = other_center[0] - own_center[0];
        const double ay = other_center[1] - own_center[1];
        const double dist = std::hypot(ax, ay);
        // Along the axis the lens spans [dist - 1, 1] from the own centre.
        const double t = ((q[0] - own_center[0]) * ax + (q[1] - own_center[1]) * ay) / dist;
        return std::clamp((1 - t) / (2 - dist), 0.0, 1.0);
}

namespace
{
enum class Tile
{
        L,
        F,
        R,
        B
};

enum class Turn
{
        Cw,
        Ccw
};

enum class Weight
{
        W,
        R90,
        RMinus90,
        R180
};

// One overlap quadrant: target tile and quadrant origin (0-based), the rotated neighbour it
// reads and the offset into that rotation, and the own/neighbour weight matrices.
struct QuadrantUpdate
{
        Tile target;
        int row0;
        int col0;
        Tile other;
        Turn turn;
        int di;
        int dj;
        Weight own;
        Weight theirs;
};

// Offsets are in units of n.
constexpr std::array<QuadrantUpdate, kQuadrantUpdates> kUpdates{{
        {Tile::L, 0, 1, Tile::F, Turn::Ccw, 1, -1, Weight::R90, Weight::RMinus90},
        {Tile::L, 1, 0, Tile::B, Turn::Cw, -1, 1, Weight::RMinus90, Weight::R90},
        {Tile::R, 0, 1, Tile::F, Turn::Cw, 1, -1, Weight::R90, Weight::RMinus90},
        {Tile::R, 1, 0, Tile::B, Turn::Ccw, -1, 1, Weight::RMinus90, Weight::R90},
        {Tile::F, 0, 0, Tile::L, Turn::Cw, 1, 1, Weight::W, Weight::R180},
        {Tile::F, 1, 1, Tile::R, Turn::Ccw, -1, -1, Weight::R180, Weight::W},
        {Tile::B, 0, 0, Tile::L, Turn::Ccw, 1, 1, Weight::W, Weight::R180},
        {Tile::B, 1, 1, Tile::R, Turn::Cw, -1, -1, Weight::R180, Weight::W},
}};

const ImageBuffer& tile_of(const SubregionTiles& t, Tile id)
{
        switch (id)
        {
        case Tile::L:
                return t.left;
        case Tile::F:
                return t.front;
        case Tile::R:
                return t.right;
        case Tile::B:
                return t.back;
        }
        return t.front;
}

ImageBuffer& tile_of(SubregionTiles& t, Tile id)
{
        return const_cast<ImageBuffer&>(tile_of(static_cast<const SubregionTiles&>(t), id));
}

const Matrix& weight_of(const FusionWeights& w, Weight id)
{
        switch (id)
        {
        case Weight::W:
                return w.w;
        case Weight::R90:
                return w.r90;
        case Weight::RMinus90:
                return w.r_minus90;
        case Weight::R180:
                return w.r180;
        }
        return w.w;
}
}

SubregionTiles fuse_subregions(const SubregionTiles& tiles, const FusionWeights& weights)
{
        std::array<int, kQuadrantUpdates> order{};
        std::iota(order.begin(), order.end(), 0);
        return fuse_subregions(tiles, weights, order);
}

SubregionTiles fuse_subregions(const SubregionTiles& tiles, const FusionWeights& weights,
                               std::span<const int, kQuadrantUpdates> order)
{
        const int n = weights.n;
        const int s = 2 * n;
        for (Tile id : {Tile::L, Tile::F, Tile::R, Tile::B})
        {
                const ImageBuffer& t = tile_of(tiles, id);
                if (t.width() != s || t.height() != s || !t.same_shape(tiles.front))
                {
                        throw ShapeMismatch("subregion tiles must all be " + std::to_string(s) + " square");
                }
        }

        // Rotated views of the unfused input; every update reads only from these and `tiles`.
        std::array<std::array<ImageBuffer, 2>, 4> rotated;
        for (Tile id : {Tile::L, Tile::F, Tile::R, Tile::B})
        {
                const ImageBuffer& t = tile_of(tiles, id);
                rotated[static_cast<int>(id)] = {rotate90(t), rotate_minus90(t)};
        }

        SubregionTiles out = tiles;
        const int nc = tiles.front.channels();
        std::array<bool, kQuadrantUpdates> seen{};
        for (int k : order)
        {
                if (k < 0 || k >= kQuadrantUpdates || seen[k])
                {
                        throw ShapeMismatch("fusion order must be a permutation of 0..7");
                }
                seen[k] = true;
                const QuadrantUpdate& up = kUpdates[k];
                const ImageBuffer& own = tile_of(tiles, up.target);
                const ImageBuffer& other = rotated[static_cast<int>(up.other)][up.turn == Turn::Cw ? 0 : 1];
                const Matrix& w_own = weight_of(weights, up.own);
                const Matrix& w_other = weight_of(weights, up.theirs);
                ImageBuffer& dst = tile_of(out, up.target);
                for (int p = 0; p < n; ++p)
                {
                        const int i = up.row0 * n + p;
                        for (int q = 0; q < n; ++q)
                        {
                                const int j = up.col0 * n + q;
                                const auto a = own.pixel(j, i);
                                const auto b = other.pixel(j + up.dj * n, i + up.di * n);
                                auto d = dst.pixel(j, i);
                                for (int c = 0; c < nc; ++c)
                                {
                                        d[c] = static_cast<float>(a[c] * w_own(p, q) + b[c] * w_other(p, q));
                                }
                        }
                }
        }
        return out;
}

std::array<ImageBuffer, 4> fuse_u_petals(const std::array<ImageBuffer, 4>& tiles, int n)
{
        const ViewPointLayout layout(n);
        const int s = layout.subregion_side();
        for (const auto& t : tiles)
        {
                if (t.width() != s || t.height() != s || !t.same_shape(tiles[0]))
                {
                        throw ShapeMismatch("subregion tiles must all be " + std::to_string(s) + " square");
                }
        }
        const FaceFrame& up = face_basis(FaceId::U);
        const int nc = tiles[0].channels();

        std::array<ImageBuffer, 4> out = tiles;
        for (FaceId sub : kSubregions)
        {
                const auto own_center = semicircle_center_on_u(sub);
                ImageBuffer& dst = out[subregion_index(sub)];
                const ImageBuffer& own = tiles[subregion_index(sub)];
                std::array<float, 4> theirs{};
                for (int i = 0; i < s; ++i)
                {
                        for (int j = 0; j < s; ++j)
                        {
                                const SubregionCoord sc{sub, i + 0.5, j + 0.5};
                                if (classify(sc, layout) != Piece::Up)
                                {
                                        continue;
                                }
                                // Pull the triangle pixel back onto the U face.
                                const Direction d = subregion_coord_to_direction(sc, layout);
                                const double k = dot(d.vec(), up.normal);
                                const std::array<double, 2> q{dot(d.vec(), up.right) / k, dot(d.vec(), up.up) / k};
                                for (FaceId nb : horizontal_neighbors(sub))
                                {
                                        const auto c = semicircle_center_on_u(nb);
                                        if (std::hypot(q[0] - c[0], q[1] - c[1]) >= 1)
                                        {
                                                continue;
                                        }
                                        const auto there = u_face_to_subregion(nb, q[0], q[1], layout);
                                        if (!there)
                                        {
                                                continue;
                                        }
                                        sample_bilinear(tiles[subregion_index(nb)], there->j, there->i, false, theirs);
                                        const double w = petal_weight(own_center, c, q);
                                        const auto a = own.pixel(j, i);
                                        auto o = dst.pixel(j, i);
                                        for (int ch = 0; ch < nc; ++ch)
                                        {
                                                o[ch] = static_cast<float>(w * a[ch] + (1 - w) * theirs[ch]);
                                        }
                                        break;
                                }
                        }
                }
        }
        return out;
}

ViewPointImage fuse_u_petals(const ViewPointImage& vp)
{
        const auto fused = fuse_u_petals(vp.tiles(), vp.layout().n());
        ViewPointImage out = vp;
        for (FaceId sub : kSubregions)
        {
                out.set_tile(sub, fused[subregion_index(sub)]);
        }
        return out;
}

ViewPointImage fuse_viewpoint(const ViewPointImage& vp)
{
        const ColorSpace cs = vp.buffer().colorspace();
        const ViewPointImage lin(to_linear(vp.buffer()), vp.layout());

        SubregionTiles tiles{lin.tile(FaceId::L), lin.tile(FaceId::F), lin.tile(FaceId::R), lin.tile(FaceId::B)};
        const SubregionTiles fused = fuse_subregions(tiles, FusionWeights(vp.layout().n()));

        std::array<ImageBuffer, 4> by_index;
        by_index[subregion_index(FaceId::L)] = fused.left;
        by_index[subregion_index(FaceId::F)] = fused.front;
        by_index[subregion_index(FaceId::R)] = fused.right;
        by_index[subregion_index(FaceId::B)] = fused.back;
        by_index = fuse_u_petals(by_index, vp.layout().n());

        ViewPointImage out = lin;
        for (FaceId sub : kSubregions)
        {
                out.set_tile(sub, by_index[subregion_index(sub)]);
        }
        if (cs != ColorSpace::Linear)
        {
                return ViewPointImage(to_colorspace(out.buffer(), cs), vp.layout());
        }
        return out;
}

}
