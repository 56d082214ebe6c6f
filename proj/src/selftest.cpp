#include <vpk/fusion.hpp>
#include <vpk/selftest.hpp>
#include <vpk/tensor_layout.hpp>
#include <vpk/viewpoint.hpp>

#include <cmath>
#include <random>
#include <sstream>

namespace vpk
{
namespace
{
SelfTestResult partition_of_unity()
{
        SelfTestResult r{"partition of unity", true, ""};
        for (int n : {2, 3, 16, 64})
        {
                const FusionWeights fw(n);
                for (int i = 0; i < n; ++i)
                {
                        for (int j = 0; j < n; ++j)
                        {
                                if (fw.w(i, j) + fw.r180(i, j) != 1.0 || fw.r90(i, j) + fw.r_minus90(i, j) != 1.0)
                                {
                                        r.passed = false;
                                        r.detail = "weight matrices, n=" + std::to_string(n);
                                        return r;
                                }
                        }
                }
        }

        const ViewPointLayout layout(16);
        std::mt19937_64 rng(11);
        std::normal_distribution<double> g;
        double worst = 0;
        for (int k = 0; k < 20000; ++k)
        {
                const Direction d(Vec3{g(rng), g(rng), g(rng)});
                const VpPixelSource src = direction_to_subregion_coords(d, layout);
                double sum = 0;
                for (int e = 0; e < src.count; ++e)
                {
                        sum += src.entries[e].weight;
                }
                worst = std::max(worst, src.count == 0 ? 1.0 : std::abs(sum - 1));
        }
        if (worst > 1e-12)
        {
                r.passed = false;
        }
        r.detail = "max |sum w - 1| over 20000 directions = " + std::to_string(worst);
        return r;
}

SelfTestResult warp_bijection()
{
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> ur(0.0, 1.0);
        std::uniform_real_distribution<double> ut(0.0, kPi);
        double worst = 0;
        for (int k = 0; k < 100000; ++k)
        {
                const double r = ur(rng);
                const double t = ut(rng);
                const PolarPoint tri = semicircle_to_triangle(r, t, 1.0);
                const PolarPoint back = triangle_to_semicircle(tri.r, tri.theta, 1.0);
                worst = std::max(worst, std::abs(back.r - r) / std::max(r, 1e-300));
        }
        std::ostringstream os;
        os << "max relative radius error " << worst;
        return {"warp bijection", worst < 1e-12, os.str()};
}

SelfTestResult split_merge_identity()
{
        std::mt19937_64 rng(5);
        std::uniform_int_distribution<int> small(1, 3);
        std::uniform_int_distribution<int> half(1, 12);
        std::uniform_real_distribution<float> val(-1.0f, 1.0f);
        for (int k = 0; k < 25; ++k)
        {
                const LatentDims dims{static_cast<std::size_t>(small(rng)), static_cast<std::size_t>(small(rng)),
                                      static_cast<std::size_t>(small(rng)), 2 * static_cast<std::size_t>(half(rng)),
                                      2 * static_cast<std::size_t>(half(rng))};
                std::vector<float> data(dims.count());
                for (float& v : data)
                {
                        v = val(rng);
                }
                const LatentGrid g(dims, std::move(data));
                if (!(perspective_to_pano(pano_to_perspective(g)) == g))
                {
                        return {"split/merge identity", false, "mismatch on a random shape"};
                }
        }
        return {"split/merge identity", true, "25 random shapes"};
}

SelfTestResult golden_fusion()
{
        // Constant tiles L=0, F=1, R=2, B=3 at n = 2; expected tiles by hand from W = [[0, .5], [.5, 1]].
        auto tile = [](float v) {
                ImageBuffer t(4, 4, 1);
                t.fill(v);
                return t;
        };
        const SubregionTiles in{tile(0), tile(1), tile(2), tile(3)};
        const SubregionTiles out = fuse_subregions(in, FusionWeights(2));

        constexpr float kLeft[16] = {0, 0, 0.5f, 1, 0, 0, 0, 0.5f, 1.5f, 0, 0, 0, 3, 1.5f, 0, 0};
        constexpr float kFront[16] = {0, 0.5f, 1, 1, 0.5f, 1, 1, 1, 1, 1, 1, 1.5f, 1, 1, 1.5f, 2};
        constexpr float kRight[16] = {2, 2, 1.5f, 1, 2, 2, 2, 1.5f, 2.5f, 2, 2, 2, 3, 2.5f, 2, 2};
        constexpr float kBack[16] = {0, 1.5f, 3, 3, 1.5f, 3, 3, 3, 3, 3, 3, 2.5f, 3, 3, 2.5f, 2};
        for (int k = 0; k < 16; ++k)
        {
                if (out.left.data()[k] != kLeft[k] || out.front.data()[k] != kFront[k] ||
                    out.right.data()[k] != kRight[k] || out.back.data()[k] != kBack[k])
                {
                        return {"n=2 golden fusion", false, "pixel " + std::to_string(k) + " differs"};
                }
        }
        return {"n=2 golden fusion", true, "all four tiles match"};
}
}

std::vector<SelfTestResult> run_selftest()
{
        return {partition_of_unity(), warp_bijection(), split_merge_identity(), golden_fusion()};
}

}
