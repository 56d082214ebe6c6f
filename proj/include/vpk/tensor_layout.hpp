#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace vpk
{
class ShapeError : public std::invalid_argument
{
public:
        using std::invalid_argument::invalid_argument;
};

/// (batch, channels, frames, height, width), row-major in that order.
struct LatentDims
{
        std::size_t batch = 0;
        std::size_t channels = 0;
        std::size_t frames = 0;
        std::size_t height = 0;
        std::size_t width = 0;

        std::size_t count() const { return batch * channels * frames * height * width; }
        bool operator==(const LatentDims&) const = default;
};

class LatentGrid
{
public:
        LatentGrid() = default;
        /// Throws ShapeError if the data length does not match the dims.
        LatentGrid(LatentDims dims, std::vector<float> data);
        explicit LatentGrid(LatentDims dims);

        const LatentDims& dims() const { return dims_; }
        const std::vector<float>& data() const { return data_; }
        std::vector<float>& data() { return data_; }

        float& at(std::size_t b, std::size_t c, std::size_t f, std::size_t y, std::size_t x)
        {
                return data_[offset(b, c, f, y, x)];
        }
        float at(std::size_t b, std::size_t c, std::size_t f, std::size_t y, std::size_t x) const
        {
                return data_[offset(b, c, f, y, x)];
        }

        bool operator==(const LatentGrid&) const = default;

        std::size_t offset(std::size_t b, std::size_t c, std::size_t f, std::size_t y, std::size_t x) const
        {
                return (((b * dims_.channels + c) * dims_.frames + f) * dims_.height + y) * dims_.width + x;
        }

private:
        LatentDims dims_;
        std::vector<float> data_;
};

/// (B, C, T, H, W) -> (4B, C, T, H/2, W/2). Output batch 4b + k holds quadrant k of input batch b,
/// quadrants in raster order (top-left, top-right, bottom-left, bottom-right).
LatentGrid pano_to_perspective(const LatentGrid& g);

/// Exact inverse of pano_to_perspective; batch must be a multiple of 4.
LatentGrid perspective_to_pano(const LatentGrid& g);

}
