#include <vpk/image.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace vpk
{
ImageBuffer::ImageBuffer(int width, int height, int channels, ColorSpace cs)
        : width_(width), height_(height), channels_(channels), colorspace_(cs)
{
        if (width <= 0 || height <= 0 || channels <= 0)
        {
                throw ShapeMismatch("image dimensions must be positive");
        }
        data_.assign(static_cast<std::size_t>(width) * height * channels, 0.0f);
}

ImageBuffer::ImageBuffer(int width, int height, int channels, std::vector<float> data, ColorSpace cs)
        : width_(width), height_(height), channels_(channels), colorspace_(cs), data_(std::move(data))
{
        if (width <= 0 || height <= 0 || channels <= 0)
        {
                throw ShapeMismatch("image dimensions must be positive");
        }
        if (data_.size() != static_cast<std::size_t>(width) * height * channels)
        {
                throw ShapeMismatch("image data length " + std::to_string(data_.size()) +
                                    " does not match " + std::to_string(width) + "x" +
                                    std::to_string(height) + "x" + std::to_string(channels));
        }
}

void ImageBuffer::fill(float v)
{
        std::fill(data_.begin(), data_.end(), v);
}

ImageBuffer ImageBuffer::crop(int x0, int y0, int w, int h) const
{
        if (x0 < 0 || y0 < 0 || x0 + w > width_ || y0 + h > height_)
        {
                throw ShapeMismatch("crop rectangle outside the image");
        }
        ImageBuffer out(w, h, channels_, colorspace_);
        for (int y = 0; y < h; ++y)
        {
                const auto src = row(y0 + y).subspan(static_cast<std::size_t>(x0) * channels_,
                                                     static_cast<std::size_t>(w) * channels_);
                std::copy(src.begin(), src.end(), out.row(y).begin());
        }
        return out;
}

void ImageBuffer::paste(const ImageBuffer& src, int x0, int y0)
{
        if (src.channels_ != channels_ || x0 < 0 || y0 < 0 || x0 + src.width_ > width_ ||
            y0 + src.height_ > height_)
        {
                throw ShapeMismatch("paste rectangle outside the image");
        }
        for (int y = 0; y < src.height_; ++y)
        {
                const auto s = src.row(y);
                std::copy(s.begin(), s.end(), row(y0 + y).begin() + static_cast<std::ptrdiff_t>(x0) * channels_);
        }
}

void sample_bilinear(const ImageBuffer& img, double x, double y, bool wrap_x, std::span<float> out)
{
        const int w = img.width();
        const int h = img.height();
        const int nc = img.channels();

        double yc = std::clamp(y, 0.5, h - 0.5) - 0.5;
        int y0 = static_cast<int>(std::floor(yc));
        double fy = yc - y0;
        int y1 = std::min(y0 + 1, h - 1);

        double xc = x - 0.5;
        int x0;
        int x1;
        double fx;
        if (wrap_x)
        {
                const double fl = std::floor(xc);
                fx = xc - fl;
                long long xi = static_cast<long long>(fl) % w;
                if (xi < 0)
                {
                        xi += w;
                }
                x0 = static_cast<int>(xi);
                x1 = x0 + 1 == w ? 0 : x0 + 1;
        }
        else
        {
                xc = std::clamp(xc, 0.0, w - 1.0);
                x0 = static_cast<int>(std::floor(xc));
                fx = xc - x0;
                x1 = std::min(x0 + 1, w - 1);
        }

        const auto p00 = img.pixel(x0, y0);
        const auto p10 = img.pixel(x1, y0);
        const auto p01 = img.pixel(x0, y1);
        const auto p11 = img.pixel(x1, y1);
        const double w00 = (1 - fx) * (1 - fy);
        const double w10 = fx * (1 - fy);
        const double w01 = (1 - fx) * fy;
        const double w11 = fx * fy;
        for (int c = 0; c < nc; ++c)
        {
                out[c] = static_cast<float>(w00 * p00[c] + w10 * p10[c] + w01 * p01[c] + w11 * p11[c]);
        }
}

float srgb_to_linear(float v)
{
        const double c = v;
        if (c <= 0.04045)
        {
                return static_cast<float>(c / 12.92);
        }
        return static_cast<float>(std::pow((c + 0.055) / 1.055, 2.4));
}

float linear_to_srgb(float v)
{
        const double c = v;
        if (c <= 0.0031308)
        {
                return static_cast<float>(c * 12.92);
        }
        return static_cast<float>(1.055 * std::pow(c, 1 / 2.4) - 0.055);
}

ImageBuffer to_colorspace(const ImageBuffer& img, ColorSpace cs)
{
        if (img.colorspace() == cs)
        {
                return img;
        }
        ImageBuffer out = img;
        out.set_colorspace(cs);
        const auto fn = cs == ColorSpace::Linear ? srgb_to_linear : linear_to_srgb;
        // Alpha stays untouched.
        const int nc = img.channels();
        const int color = nc == 4 ? 3 : nc;
        auto& d = out.data();
        for (std::size_t i = 0; i < d.size(); i += nc)
        {
                for (int c = 0; c < color; ++c)
                {
                        d[i + c] = fn(d[i + c]);
                }
        }
        return out;
}

ImageBuffer to_linear(const ImageBuffer& img)
{
        return to_colorspace(img, ColorSpace::Linear);
}

}
