#include <vpk/tensor_layout.hpp>

#include <algorithm>
#include <string>

namespace vpk
{
LatentGrid::LatentGrid(LatentDims dims, std::vector<float> data) : dims_(dims), data_(std::move(data))
{
        if (data_.size() != dims_.count())
        {
                throw ShapeError("latent data length " + std::to_string(data_.size()) + " does not match dims");
        }
}

LatentGrid::LatentGrid(LatentDims dims) : dims_(dims), data_(dims.count(), 0.0f) { }

namespace
{
// Copies one spatial row segment per (b, c, f, y); `split` selects the direction.
void move_quadrants(const LatentGrid& src, LatentGrid& dst, bool split)
{
        const LatentDims& pano = split ? src.dims() : dst.dims();
        const std::size_t hh = pano.height / 2;
        const std::size_t hw = pano.width / 2;
        for (std::size_t b = 0; b < pano.batch; ++b)
        {
                for (std::size_t k = 0; k < 4; ++k)
                {
                        const std::size_t y0 = (k / 2) * hh;
                        const std::size_t x0 = (k % 2) * hw;
                        for (std::size_t c = 0; c < pano.channels; ++c)
                        {
                                for (std::size_t f = 0; f < pano.frames; ++f)
                                {
                                        for (std::size_t y = 0; y < hh; ++y)
                                        {
                                                if (split)
                                                {
                                                        const float* from = src.data().data() + src.offset(b, c, f, y0 + y, x0);
                                                        std::copy(from, from + hw, dst.data().data() + dst.offset(4 * b + k, c, f, y, 0));
                                                }
                                                else
                                                {
                                                        const float* from = src.data().data() + src.offset(4 * b + k, c, f, y, 0);
                                                        std::copy(from, from + hw, dst.data().data() + dst.offset(b, c, f, y0 + y, x0));
                                                }
                                        }
                                }
                        }
                }
        }
}
}

LatentGrid pano_to_perspective(const LatentGrid& g)
{
        const LatentDims& d = g.dims();
        if (d.height % 2 != 0 || d.width % 2 != 0)
        {
                throw ShapeError("pano grid needs even height and width");
        }
        LatentGrid out({4 * d.batch, d.channels, d.frames, d.height / 2, d.width / 2});
        if (d.count() > 0)
        {
                move_quadrants(g, out, true);
        }
        return out;
}

LatentGrid perspective_to_pano(const LatentGrid& g)
{
        const LatentDims& d = g.dims();
        if (d.batch % 4 != 0)
        {
                throw ShapeError("perspective grid batch must be a multiple of 4");
        }
        LatentGrid out({d.batch / 4, d.channels, d.frames, d.height * 2, d.width * 2});
        if (d.count() > 0)
        {
                move_quadrants(g, out, false);
        }
        return out;
}

}
