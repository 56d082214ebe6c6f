#pragma once

#include <vpk/image.hpp>

#include <array>
#include <span>
#include <vector>

namespace vpk
{
class ViewPointImage;

/// Dense square matrix, row-major, 0-based.
class Matrix
{
public:
        Matrix() = default;
        explicit Matrix(int n, double fill = 0) : n_(n), a_(static_cast<std::size_t>(n) * n, fill) { }

        int size() const { return n_; }
        double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
        double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

        bool operator==(const Matrix&) const = default;

private:
        int n_ = 0;
        std::vector<double> a_;
};

Matrix identity_matrix(int n);
/// Anti-diagonal identity J.
Matrix exchange_matrix(int n);
Matrix transpose(const Matrix& a);
Matrix multiply(const Matrix& a, const Matrix& b);

/// A^T J, a quarter turn clockwise.
Matrix rotate90(const Matrix& a);
/// J A^T, a quarter turn counter-clockwise.
Matrix rotate_minus90(const Matrix& a);
/// J A J.
Matrix rotate180(const Matrix& a);

/// The same index permutations applied per channel to a square image tile.
ImageBuffer rotate90(const ImageBuffer& tile);
ImageBuffer rotate_minus90(const ImageBuffer& tile);
ImageBuffer rotate180(const ImageBuffer& tile);

/// Gradient weight W[i][j] = (i + j - 2) / (2(n - 1)) for 1-based i, j, and its rotations.
struct FusionWeights
{
        explicit FusionWeights(int n);

        int n;
        Matrix w;
        Matrix r90;
        Matrix r_minus90;
        Matrix r180;
};

/// Continuous version of W for a point `depth` net units from the neighbouring face centre
/// (depth 1 is the shared cube edge). Reproduces W exactly at pixel centres; clamped to [0,1].
double rhombus_weight(int n, double depth);

/// Linear ramp across the lens between two unit disks: 1 on the own-centre side, 0 on the far
/// boundary, 1/2 on the bisector. Centres and the point are in U face coordinates.
double petal_weight(std::array<double, 2> own_center, std::array<double, 2> other_center,
                    std::array<double, 2> q);

/// The four subregion tiles, each s x s with s = 2n.
struct SubregionTiles
{
        ImageBuffer left;
        ImageBuffer front;
        ImageBuffer right;
        ImageBuffer back;
};

/// Number of quadrant updates in fuse_subregions (two per subregion).
inline constexpr int kQuadrantUpdates = 8;

/// Blends the overlap quadrants of all four tiles simultaneously; every read comes from the
/// unfused input. Pixels outside the overlap quadrants are unchanged. Throws ShapeMismatch.
SubregionTiles fuse_subregions(const SubregionTiles& tiles, const FusionWeights& weights);

/// Same result for any permutation of 0..7; the order only changes which quadrant is written first.
SubregionTiles fuse_subregions(const SubregionTiles& tiles, const FusionWeights& weights,
                               std::span<const int, kQuadrantUpdates> order);

/// Blends the lens-shaped overlaps between adjacent U-face semicircles. Tiles indexed by subregion_index.
std::array<ImageBuffer, 4> fuse_u_petals(const std::array<ImageBuffer, 4>& tiles, int n);
ViewPointImage fuse_u_petals(const ViewPointImage& vp);

/// Rhombus fusion followed by petal fusion, in linear light for sRGB-tagged maps.
ViewPointImage fuse_viewpoint(const ViewPointImage& vp);

}
