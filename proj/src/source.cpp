#include <vpk/source.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace vpk
{
void parallel_rows(int rows, int threads, const std::function<void(int)>& fn)
{
        const int workers = std::clamp(threads, 1, std::max(rows, 1));
        if (workers == 1)
        {
                for (int y = 0; y < rows; ++y)
                {
                        fn(y);
                }
                return;
        }

        std::exception_ptr first_error;
        std::mutex error_mutex;
        {
                std::vector<std::jthread> pool;
                pool.reserve(workers);
                for (int w = 0; w < workers; ++w)
                {
                        const int begin = static_cast<int>(static_cast<long long>(rows) * w / workers);
                        const int end = static_cast<int>(static_cast<long long>(rows) * (w + 1) / workers);
                        pool.emplace_back([&, begin, end] {
                                try
                                {
                                        for (int y = begin; y < end; ++y)
                                        {
                                                fn(y);
                                        }
                                }
                                catch (...)
                                {
                                        std::lock_guard lock(error_mutex);
                                        if (!first_error)
                                        {
                                                first_error = std::current_exception();
                                        }
                                }
                        });
                }
        }
        if (first_error)
        {
                std::rethrow_exception(first_error);
        }
}

RemapTable::RemapTable(int width, int height, std::vector<TapSet> taps, std::vector<bool> wraps)
        : width_(width), height_(height), taps_(std::move(taps)), wraps_(std::move(wraps))
{
        if (taps_.size() != static_cast<std::size_t>(width) * height)
        {
                throw ShapeMismatch("remap table size does not match its dimensions");
        }
}

RemapTable build_remap(int width, int height, const PixelToDirection& target, const SourceGeometry& source,
                       int threads)
{
        std::vector<TapSet> taps(static_cast<std::size_t>(width) * height);
        std::atomic<bool> uncovered{false};
        parallel_rows(height, threads, [&](int y) {
                for (int x = 0; x < width; ++x)
                {
                        TapSet t = source.locate(target(x + 0.5, y + 0.5));
                        if (t.count == 0)
                        {
                                uncovered = true;
                        }
                        taps[static_cast<std::size_t>(y) * width + x] = t;
                }
        });
        if (uncovered)
        {
                throw UncoveredDirection("source layout does not cover every target direction");
        }
        std::vector<bool> wraps(source.plane_count());
        for (int p = 0; p < source.plane_count(); ++p)
        {
                wraps[p] = source.wraps(p);
        }
        return RemapTable(width, height, std::move(taps), std::move(wraps));
}

ImageBuffer apply_remap(const RemapTable& table, std::span<const ImageBuffer> planes, int threads)
{
        if (static_cast<int>(planes.size()) != table.plane_count() || planes.empty())
        {
                throw ShapeMismatch("plane count does not match the remap table");
        }
        const int nc = planes[0].channels();
        const ColorSpace cs = planes[0].colorspace();
        for (const auto& p : planes)
        {
                if (p.channels() != nc || p.colorspace() != cs || p.empty())
                {
                        throw ShapeMismatch("source planes disagree on channels or color space");
                }
        }
        const bool srgb = cs == ColorSpace::Srgb;
        const int color = nc == 4 ? 3 : nc;

        ImageBuffer out(table.width(), table.height(), nc, cs);
        parallel_rows(table.height(), threads, [&](int y) {
                std::array<float, 4> a{};
                std::array<float, 4> b{};
                for (int x = 0; x < table.width(); ++x)
                {
                        const TapSet& ts = table.at(x, y);
                        auto dst = out.pixel(x, y);
                        const Tap& t0 = ts.taps[0];
                        sample_bilinear(planes[t0.plane], t0.x, t0.y, table.wraps(t0.plane), a);
                        if (ts.count == 1)
                        {
                                std::copy_n(a.begin(), nc, dst.begin());
                                continue;
                        }
                        const Tap& t1 = ts.taps[1];
                        sample_bilinear(planes[t1.plane], t1.x, t1.y, table.wraps(t1.plane), b);
                        for (int c = 0; c < nc; ++c)
                        {
                                if (srgb && c < color)
                                {
                                        const double v = t0.weight * srgb_to_linear(a[c]) +
                                                         t1.weight * srgb_to_linear(b[c]);
                                        dst[c] = linear_to_srgb(static_cast<float>(v));
                                }
                                else
                                {
                                        dst[c] = static_cast<float>(t0.weight * a[c] + t1.weight * b[c]);
                                }
                        }
                }
        });
        return out;
}

}
