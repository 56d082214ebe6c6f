#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace vpk
{
class ShapeMismatch : public std::invalid_argument
{
public:
        using std::invalid_argument::invalid_argument;
};

enum class ColorSpace
{
        Linear,
        Srgb
};

/// Row-major H x W x C float raster, nominal range [0,1].
class ImageBuffer
{
public:
        ImageBuffer() = default;
        ImageBuffer(int width, int height, int channels, ColorSpace cs = ColorSpace::Linear);
        ImageBuffer(int width, int height, int channels, std::vector<float> data,
                    ColorSpace cs = ColorSpace::Linear);

        int width() const { return width_; }
        int height() const { return height_; }
        int channels() const { return channels_; }
        ColorSpace colorspace() const { return colorspace_; }
        void set_colorspace(ColorSpace cs) { colorspace_ = cs; }
        bool empty() const { return data_.empty(); }

        std::span<float> pixel(int x, int y)
        {
                return {data_.data() + index(x, y), static_cast<std::size_t>(channels_)};
        }
        std::span<const float> pixel(int x, int y) const
        {
                return {data_.data() + index(x, y), static_cast<std::size_t>(channels_)};
        }
        float& at(int x, int y, int c) { return data_[index(x, y) + c]; }
        float at(int x, int y, int c) const { return data_[index(x, y) + c]; }

        std::span<float> row(int y)
        {
                return {data_.data() + index(0, y), static_cast<std::size_t>(width_) * channels_};
        }
        std::span<const float> row(int y) const
        {
                return {data_.data() + index(0, y), static_cast<std::size_t>(width_) * channels_};
        }

        std::vector<float>& data() { return data_; }
        const std::vector<float>& data() const { return data_; }

        void fill(float v);

        bool same_shape(const ImageBuffer& o) const
        {
                return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
        }

        /// Copy of the rectangle [x0, x0+w) x [y0, y0+h).
        ImageBuffer crop(int x0, int y0, int w, int h) const;
        void paste(const ImageBuffer& src, int x0, int y0);

private:
        std::size_t index(int x, int y) const
        {
                return (static_cast<std::size_t>(y) * width_ + x) * channels_;
        }

        int width_ = 0;
        int height_ = 0;
        int channels_ = 0;
        ColorSpace colorspace_ = ColorSpace::Linear;
        std::vector<float> data_;
};

/// Bilinear interpolation with pixel centers at index + 0.5. y clamps to [0.5, h - 0.5];
/// x wraps modulo the width when wrap_x is set and clamps otherwise. Writes channels() values.
void sample_bilinear(const ImageBuffer& img, double x, double y, bool wrap_x, std::span<float> out);

float srgb_to_linear(float v);
float linear_to_srgb(float v);

/// Converted copies; a buffer already in the target space is returned unchanged.
ImageBuffer to_linear(const ImageBuffer& img);
ImageBuffer to_colorspace(const ImageBuffer& img, ColorSpace cs);

}
