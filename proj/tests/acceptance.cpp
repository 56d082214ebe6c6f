// Acceptance checks: one PASS/FAIL line per criterion.
//
// Usage: acceptance [--known-failure K]...
// Exit status is 0 when the failing criteria are exactly the listed known failures, so a known
// failure that starts passing is reported as loudly as a new failure.

#include "oracles.hpp"

#include <vpk/cli.hpp>
#include <vpk/cubemap.hpp>
#include <vpk/fusion.hpp>
#include <vpk/io.hpp>
#include <vpk/metrics.hpp>
#include <vpk/tensor_layout.hpp>
#include <vpk/viewpoint.hpp>

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace vpk;
namespace fs = std::filesystem;

namespace
{
struct Outcome
{
        bool pass = false;
        std::string detail;
};

std::string fmt(const char* f, double a)
{
        char buf[64];
        std::snprintf(buf, sizeof buf, f, a);
        return buf;
}

bool within_ulp(double a, double b)
{
        return a == b || std::nextafter(a, b) == b;
}

double max_abs_diff(const ImageBuffer& a, const ImageBuffer& b)
{
        double m = 0;
        for (std::size_t k = 0; k < a.data().size(); ++k)
        {
                m = std::max(m, static_cast<double>(std::abs(a.data()[k] - b.data()[k])));
        }
        return m;
}

const ErpImage& fixture()
{
        static const ErpImage erp = reference_fixture();
        return erp;
}

const ViewPointImage& fixture_viewpoint()
{
        static const ViewPointImage vp = erp_to_viewpoint(fixture(), ViewPointLayout(256));
        return vp;
}

// 1. Weight algebra.
Outcome weight_algebra()
{
        for (int n : {2, 3, 16, 256})
        {
                const FusionWeights fw(n);
                const Matrix& w = fw.w;
                const bool corners = w(0, 0) == 0 && w(n - 1, n - 1) == 1 && w(0, n - 1) == 0.5 && w(n - 1, 0) == 0.5;
                if (!corners)
                {
                        return {false, "corner values wrong at n=" + std::to_string(n)};
                }
                const Matrix r90 = rotate90(w);
                const Matrix rm90 = rotate_minus90(w);
                const Matrix r180 = rotate180(w);
                for (int i = 0; i < n; ++i)
                {
                        for (int j = 0; j < n; ++j)
                        {
                                if (!within_ulp(r90(i, j) + rm90(i, j), 1.0) || !within_ulp(w(i, j) + r180(i, j), 1.0))
                                {
                                        return {false, "partition of unity breaks at n=" + std::to_string(n)};
                                }
                        }
                }
                if (!(multiply(exchange_matrix(n), exchange_matrix(n)) == identity_matrix(n)))
                {
                        return {false, "J*J != I at n=" + std::to_string(n)};
                }
        }
        return {true, "n in {2,3,16,256}: corners, R90+R-90=1, W+R180=1, JJ=I within 1 ULP"};
}

// 2. Warp bijection.
Outcome warp_bijection()
{
        const double a = 1.0;
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> ur(0, a);
        std::uniform_real_distribution<double> ut(0, kPi);
        double worst = 0;
        for (int k = 0; k < 100000; ++k)
        {
                const double r = ur(rng);
                const double t = ut(rng);
                const PolarPoint tri = semicircle_to_triangle(r, t, a);
                const PolarPoint back = triangle_to_semicircle(tri.r, tri.theta, a);
                if (r > 0)
                {
                        worst = std::max(worst, std::abs(back.r - r) / r);
                }
        }
        bool boundary = true;
        for (double t : {0.0, kPi / 4, kPi / 2, 3 * kPi / 4, kPi})
        {
                boundary = boundary && semicircle_to_triangle(a, t, a).r == oracle::triangle_extent(t, a);
        }
        return {worst < 1e-12 && boundary,
                "max relative error " + fmt("%.3g", worst) + " (< 1e-12); boundary r=a exact: " +
                    (boundary ? "yes" : "no")};
}

// 3. Fusion idempotence and snapshot semantics.
Outcome fusion_idempotence()
{
        const ViewPointImage& vp = fixture_viewpoint();
        const ViewPointImage fused = fuse_viewpoint(vp);
        const double full = max_abs_diff(fused.buffer(), vp.buffer());

        const SubregionTiles tiles{vp.tile(FaceId::L), vp.tile(FaceId::F), vp.tile(FaceId::R), vp.tile(FaceId::B)};
        const FusionWeights fw(vp.layout().n());
        const SubregionTiles ref = fuse_subregions(tiles, fw);
        const double rhombus = std::max({max_abs_diff(ref.left, tiles.left), max_abs_diff(ref.front, tiles.front),
                                         max_abs_diff(ref.right, tiles.right), max_abs_diff(ref.back, tiles.back)});

        std::array<int, kQuadrantUpdates> order{};
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 rng(9);
        bool identical = true;
        for (int k = 0; k < 12 && identical; ++k)
        {
                if (k == 0)
                {
                        std::reverse(order.begin(), order.end());
                }
                else
                {
                        std::shuffle(order.begin(), order.end(), rng);
                }
                const SubregionTiles out = fuse_subregions(tiles, fw, order);
                identical = out.left.data() == ref.left.data() && out.front.data() == ref.front.data() &&
                            out.right.data() == ref.right.data() && out.back.data() == ref.back.data();
        }

        return {full <= 1e-6 && identical,
                "max pixel change " + fmt("%.3g", full) + " (<= 1e-6; rhombi " + fmt("%.3g", rhombus) +
                    ", rest from U petals); order permutations bit-identical: " + (identical ? "yes" : "no")};
}

// 4. Round-trip fidelity.
Outcome round_trip()
{
        const ErpImage& erp = fixture();
        const ViewPointLayout layout(256);
        const ErpImage back = reconstruct_erp(fixture_viewpoint(), erp.dims(), true);
        const RoundTripReport r = roundtrip_report(erp, back, layout);
        const RoundTripReport cp =
            roundtrip_report(erp, cubemap_to_erp(erp_to_cubemap(erp, 256), erp.dims()), layout);
        const bool pass = r.psnr_db >= 32 && r.pole_north_psnr >= 28 && r.pole_south_psnr >= 28;
        return {pass, "ViewPoint " + fmt("%.2f", r.psnr_db) + " dB (>= 32), poles " + fmt("%.2f", r.pole_north_psnr) +
                          "/" + fmt("%.2f", r.pole_south_psnr) + " dB (>= 28); cubemap baseline " +
                          fmt("%.2f", cp.psnr_db) + " dB, poles " + fmt("%.2f", cp.pole_north_psnr) + "/" +
                          fmt("%.2f", cp.pole_south_psnr)};
}

// 5. Coverage and multiplicity.
Outcome coverage()
{
        const ViewPointLayout layout(256);
        std::mt19937_64 rng(55);
        std::normal_distribution<double> g;
        const int samples = 1000000;
        int uncovered = 0;
        int doubles = 0;
        for (int k = 0; k < samples; ++k)
        {
                const Direction d(Vec3{g(rng), g(rng), g(rng)});
                const int c = direction_to_subregion_coords(d, layout).count;
                uncovered += c < 1;
                doubles += c == 2;
        }
        const double measured = static_cast<double>(doubles) / samples;

        // Independent Monte Carlo over the geometric description of the overlaps.
        std::mt19937_64 orng(77);
        const int osamples = 4000000;
        int odoubles = 0;
        for (int k = 0; k < osamples; ++k)
        {
                const double x = g(orng), y = g(orng), z = g(orng);
                odoubles += oracle::multiplicity(x, y, z) == 2;
        }
        const double expected = static_cast<double>(odoubles) / osamples;
        const double diff_pp = 100 * std::abs(measured - expected);
        return {uncovered == 0 && diff_pp <= 0.5,
                "uncovered " + std::to_string(uncovered) + "; overlap fraction " + fmt("%.4f", measured) +
                    " vs oracle " + fmt("%.4f", expected) + " (rhombi 1/3 + U petals), diff " + fmt("%.3f", diff_pp) +
                    " pp (<= 0.5)"};
}

// 6. Mask correctness.
Outcome mask()
{
        const ViewPointLayout layout(128);
        const int side = layout.map_side();
        const int s = layout.subregion_side();
        ImageBuffer frame(256, 256, 3);
        frame.fill(1.0f);
        const ConditionMaps maps = project_condition(layout, CameraPose::for_face(FaceId::F), frame);

        // Oracle: map cell [L F / B R] -> net -> cube point -> is it on face F?
        const FaceId grid[2][2] = {{FaceId::L, FaceId::F}, {FaceId::B, FaceId::R}};
        std::vector<char> want(static_cast<std::size_t>(side) * side);
        for (int y = 0; y < side; ++y)
        {
                for (int x = 0; x < side; ++x)
                {
                        const FaceId sub = grid[y / s][x / s];
                        const oracle::Net p = oracle::tile_to_net(sub, y % s + 0.5, x % s + 0.5, s);
                        const Vec3 w = oracle::net_to_world(sub, p);
                        want[static_cast<std::size_t>(y) * side + x] =
                            oracle::dominant_face(w.x, w.y, w.z) == FaceId::F;
                }
        }
        long mismatch = 0;
        long perimeter = 0;
        long diamond_mismatch = 0;
        for (int y = 0; y < side; ++y)
        {
                for (int x = 0; x < side; ++x)
                {
                        const bool m = maps.mask.buffer().at(x, y, 0) > 0.5f;
                        const bool o = want[static_cast<std::size_t>(y) * side + x];
                        mismatch += m != o;
                        bool edge = false;
                        for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}})
                        {
                                const int xx = x + dx;
                                const int yy = y + dy;
                                if (xx >= 0 && yy >= 0 && xx < side && yy < side)
                                {
                                        edge = edge || want[static_cast<std::size_t>(yy) * side + xx] != o;
                                }
                        }
                        perimeter += o && edge;
                        if (grid[y / s][x / s] == FaceId::F)
                        {
                                const oracle::Net p = oracle::tile_to_net(FaceId::F, y % s + 0.5, x % s + 0.5, s);
                                const bool in_diamond = std::abs(p.u) <= 1 && std::abs(p.v) <= 1;
                                diamond_mismatch += m != in_diamond;
                        }
                }
        }
        return {mismatch <= perimeter,
                "mismatch " + std::to_string(mismatch) + " px vs F-face indicator (<= perimeter " +
                    std::to_string(perimeter) + "); inside tile S_F vs central diamond " +
                    std::to_string(diamond_mismatch) + " px"};
}

// 7. Tensor layout.
Outcome tensor_layout()
{
        std::mt19937_64 rng(49);
        std::uniform_int_distribution<int> small(1, 4);
        std::uniform_int_distribution<int> half(1, 16);
        std::uniform_real_distribution<float> u(-1, 1);
        std::vector<LatentDims> shapes{{1, 16, 49, 64, 64}};
        for (int k = 0; k < 30; ++k)
        {
                shapes.push_back({static_cast<std::size_t>(small(rng)), static_cast<std::size_t>(small(rng)),
                                  static_cast<std::size_t>(small(rng)), 2 * static_cast<std::size_t>(half(rng)),
                                  2 * static_cast<std::size_t>(half(rng))});
        }
        for (const LatentDims& d : shapes)
        {
                std::vector<float> data(d.count());
                for (float& v : data)
                {
                        v = u(rng);
                }
                const LatentGrid g(d, data);
                const LatentGrid p = pano_to_perspective(g);
                if (!(perspective_to_pano(p) == g))
                {
                        return {false, "merge(split(g)) != g"};
                }
                std::vector<float> a = g.data();
                std::vector<float> b = p.data();
                std::sort(a.begin(), a.end());
                std::sort(b.begin(), b.end());
                if (a != b)
                {
                        return {false, "split is not a permutation"};
                }
        }
        return {true, std::to_string(shapes.size()) + " shapes incl. (1,16,49,64,64): exact identity, sorted data equal"};
}

// 8. Perspective extraction.
Outcome perspective()
{
        const ErpImage& erp = fixture();
        const CubemapImage cm = erp_to_cubemap(erp, 256);
        const std::array<ImageBuffer, 1> planes{erp.buffer()};
        double worst = 0;
        for (FaceId f : kAllFaces)
        {
                const ImageBuffer v =
                    extract_perspective(ErpGeometry(erp.dims()), planes, CameraPose::for_face(f), {256, 256});
                worst = std::max(worst, max_abs_diff(v, cm.face(f)));
        }
        return {worst <= 1e-6, "max channel difference " + fmt("%.3g", worst) + " (<= 1e-6)"};
}

// 9. Determinism of cmd_convert across thread counts.
std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 1469598103934665603ull)
{
        for (unsigned char c : bytes)
        {
                h = (h ^ c) * 1099511628211ull;
        }
        return h;
}

std::uint64_t tree_hash(const fs::path& p)
{
        if (!fs::is_directory(p))
        {
                return fnv1a(read_file(p));
        }
        std::vector<fs::path> files;
        for (const auto& e : fs::recursive_directory_iterator(p))
        {
                if (e.is_regular_file())
                {
                        files.push_back(e.path());
                }
        }
        std::sort(files.begin(), files.end());
        std::uint64_t h = 1469598103934665603ull;
        for (const auto& f : files)
        {
                h = fnv1a(fs::relative(f, p).string(), h);
                h = fnv1a(read_file(f), h);
        }
        return h;
}

int convert(const std::vector<std::string>& args)
{
        std::vector<const char*> argv{"vpk", "convert"};
        for (const auto& a : args)
        {
                argv.push_back(a.c_str());
        }
        std::ostringstream out;
        std::ostringstream err;
        return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome determinism()
{
        const fs::path dir = fs::temp_directory_path() / ("vpk_acceptance_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir / "seq");
        ImageBuffer img = fixture().buffer();
        img.set_colorspace(ColorSpace::Srgb);
        write_png(dir / "pano.png", img);
        for (int i = 0; i < 3; ++i)
        {
                ImageBuffer f = band_limited_sphere_image({256, 128}, 100 + i, 6).buffer();
                f.set_colorspace(ColorSpace::Srgb);
                write_png(dir / "seq" / frame_name(i), f);
        }
        Manifest m;
        m.frames = 3;
        m.fps = 24;
        m.width = 256;
        m.height = 128;
        write_manifest(dir / "seq", m);

        struct Job
        {
                std::string input;
                std::string name;
                std::vector<std::string> flags;
        };
        const std::vector<Job> jobs{
            {"pano.png", "vp.png", {"--to", "viewpoint", "--fuse"}},
            {"pano.png", "cube", {"--to", "cubemap"}},
            {"seq", "seq_vp", {"--to", "viewpoint", "--fuse"}},
        };
        int compared = 0;
        bool same = true;
        for (const Job& j : jobs)
        {
                std::uint64_t h[2] = {0, 0};
                for (int t = 0; t < 2; ++t)
                {
                        const fs::path out = dir / (std::to_string(t) + "_" + j.name);
                        std::vector<std::string> args{(dir / j.input).string(), out.string()};
                        args.insert(args.end(), j.flags.begin(), j.flags.end());
                        args.insert(args.end(), {"--threads", t == 0 ? "1" : "8"});
                        if (convert(args) != kExitOk)
                        {
                                fs::remove_all(dir);
                                return {false, "convert failed for " + j.name};
                        }
                        h[t] = tree_hash(out);
                }
                same = same && h[0] == h[1];
                ++compared;
        }
        fs::remove_all(dir);
        return {same, std::to_string(compared) + " conversions (image, cubemap dir, 3-frame sequence): threads 1 vs 8 " +
                          (same ? "bit-identical" : "differ")};
}
}

int main(int argc, char** argv)
{
        std::set<int> known;
        for (int k = 1; k < argc; ++k)
        {
                if (std::strcmp(argv[k], "--known-failure") == 0 && k + 1 < argc)
                {
                        known.insert(std::atoi(argv[++k]));
                }
        }

        struct Criterion
        {
                int id;
                const char* name;
                Outcome (*run)();
        };
        const Criterion criteria[] = {
            {1, "fusion weight algebra", weight_algebra},
            {2, "warp bijection", warp_bijection},
            {3, "fusion idempotence", fusion_idempotence},
            {4, "round-trip fidelity", round_trip},
            {5, "coverage and multiplicity", coverage},
            {6, "mask correctness", mask},
            {7, "tensor layout", tensor_layout},
            {8, "perspective extraction", perspective},
            {9, "determinism", determinism},
        };

        std::set<int> failed;
        for (const Criterion& c : criteria)
        {
                const auto t0 = std::chrono::steady_clock::now();
                Outcome o;
                try
                {
                        o = c.run();
                }
                catch (const std::exception& e)
                {
                        o = {false, std::string("exception: ") + e.what()};
                }
                const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                std::printf("[%s] %d %s: %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
                if (!o.pass)
                {
                        failed.insert(c.id);
                }
        }
        std::fflush(stdout);

        for (int id : failed)
        {
                if (known.count(id))
                {
                        std::printf("criterion %d fails as recorded in the known-failure list\n", id);
                }
        }
        for (int id : known)
        {
                if (!failed.count(id))
                {
                        std::printf("criterion %d is listed as a known failure but passed\n", id);
                }
        }
        return failed == known ? 0 : 1;
}
