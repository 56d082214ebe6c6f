#pragma once

#include <vpk/image.hpp>
#include <vpk/sphere.hpp>

#include <array>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace vpk
{
class UncoveredDirection : public std::runtime_error
{
public:
        using std::runtime_error::runtime_error;
};

/// One bilinear read from a source plane at continuous pixel coordinates.
struct Tap
{
        int plane = 0;
        double x = 0;
        double y = 0;
        double weight = 1;
};

/// Up to two weighted reads whose weights sum to one.
struct TapSet
{
        std::array<Tap, 2> taps{};
        int count = 0;

        void push(const Tap& t) { taps[count++] = t; }
};

/// Layout of a spherical representation: where a direction lives in its planes.
/// Geometry only; pixel data is supplied separately so one lookup table serves many frames.
class SourceGeometry
{
public:
        virtual ~SourceGeometry() = default;

        virtual TapSet locate(const Direction& d) const = 0;
        virtual int plane_count() const = 0;
        virtual bool wraps(int plane) const = 0;
};

using PixelToDirection = std::function<Direction(double x, double y)>;

/// Precomputed per-output-pixel taps. Built once per (target, source) layout pair and read-only after.
class RemapTable
{
public:
        RemapTable() = default;
        RemapTable(int width, int height, std::vector<TapSet> taps, std::vector<bool> wraps);

        int width() const { return width_; }
        int height() const { return height_; }
        const TapSet& at(int x, int y) const { return taps_[static_cast<std::size_t>(y) * width_ + x]; }
        bool wraps(int plane) const { return wraps_[plane]; }
        int plane_count() const { return static_cast<int>(wraps_.size()); }

private:
        int width_ = 0;
        int height_ = 0;
        std::vector<TapSet> taps_;
        std::vector<bool> wraps_;
};

/// Evaluates target pixel centers through the source geometry. Throws UncoveredDirection if any
/// target direction has no source.
RemapTable build_remap(int width, int height, const PixelToDirection& target, const SourceGeometry& source,
                       int threads = 1);

/// Samples the planes through the table. Two-tap blends run in linear light for sRGB-tagged planes.
ImageBuffer apply_remap(const RemapTable& table, std::span<const ImageBuffer> planes, int threads = 1);

/// Runs fn(y) for every row, split into contiguous bands over at most `threads` workers.
void parallel_rows(int rows, int threads, const std::function<void(int)>& fn);

}
