#include <vpk/cli.hpp>
#include <vpk/io.hpp>
#include <vpk/metrics.hpp>

#include <doctest.h>
#include <json.hpp>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <vector>

using namespace vpk;
namespace fs = std::filesystem;

namespace
{
struct TempDir
{
        fs::path path;
        TempDir()
        {
                static int counter = 0;
                path = fs::temp_directory_path() / ("vpk_cli_test_" + std::to_string(::getpid()) + "_" +
                                                    std::to_string(counter++));
                fs::create_directories(path);
        }
        ~TempDir() { fs::remove_all(path); }
};

struct Run
{
        int code;
        std::string out;
        std::string err;
};

Run cli(std::vector<std::string> args)
{
        args.insert(args.begin(), "vpk");
        std::vector<const char*> argv;
        for (const auto& a : args)
        {
                argv.push_back(a.c_str());
        }
        std::ostringstream out;
        std::ostringstream err;
        const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return {code, out.str(), err.str()};
}

fs::path write_erp(const fs::path& p, std::uint64_t seed = 3)
{
        ImageBuffer img = band_limited_sphere_image({128, 64}, seed, 4).buffer();
        img.set_colorspace(ColorSpace::Srgb);
        write_png(p, img);
        return p;
}

fs::path write_sequence(const fs::path& dir, int frames)
{
        fs::create_directories(dir);
        for (int i = 0; i < frames; ++i)
        {
                write_erp(dir / frame_name(i), 10 + i);
        }
        Manifest m;
        m.representation = Representation::Erp;
        m.frames = frames;
        m.fps = 24;
        m.width = 128;
        m.height = 64;
        write_manifest(dir, m);
        return dir;
}

std::string slurp_tree(const fs::path& dir)
{
        std::vector<fs::path> files;
        for (const auto& e : fs::recursive_directory_iterator(dir))
        {
                if (e.is_regular_file())
                {
                        files.push_back(e.path());
                }
        }
        std::sort(files.begin(), files.end());
        std::string all;
        for (const auto& f : files)
        {
                all += fs::relative(f, dir).string() + "\n" + read_file(f);
        }
        return all;
}
}

TEST_CASE("selftest passes")
{
        const Run r = cli({"selftest"});
        CHECK(r.code == kExitOk);
        CHECK(r.out.find("FAIL") == std::string::npos);
        CHECK(r.out.find("PASS n=2 golden fusion") != std::string::npos);
}

TEST_CASE("the installed binary runs")
{
        CHECK(std::system((std::string(VPK_TOOL_PATH) + " --help > /dev/null").c_str()) == 0);
}

TEST_CASE("single image conversions")
{
        TempDir t;
        const fs::path erp = write_erp(t.path / "pano.png");

        REQUIRE(cli({"convert", erp.string(), (t.path / "vp.png").string(), "--to", "viewpoint", "--n", "24"}).code ==
                kExitOk);
        CHECK(read_viewpoint_sidecar(t.path / "vp.png") == 24);
        CHECK(read_png(t.path / "vp.png").width() == 96);

        REQUIRE(cli({"convert", (t.path / "vp.png").string(), (t.path / "back.png").string(), "--to", "erp"}).code ==
                kExitOk);
        const ImageBuffer back = read_png(t.path / "back.png");
        CHECK(back.width() == 96);
        CHECK(back.height() == 48);

        REQUIRE(cli({"convert", erp.string(), (t.path / "cube").string(), "--to", "cubemap"}).code == kExitOk);
        CHECK(fs::exists(t.path / "cube" / "U.png"));
        CHECK(read_png(t.path / "cube" / "F.png").width() == 32);
        REQUIRE(cli({"convert", (t.path / "cube").string(), (t.path / "c2v.png").string(), "--to", "viewpoint"}).code ==
                kExitOk);
        CHECK(read_viewpoint_sidecar(t.path / "c2v.png") == 32);

        REQUIRE(cli({"convert", erp.string(), (t.path / "atlas.png").string(), "--to", "cubemap", "--face-side", "16"})
                    .code == kExitOk);
        CHECK(read_png(t.path / "atlas.png").width() == 48);
        REQUIRE(cli({"convert", (t.path / "atlas.png").string(), (t.path / "a2e.png").string(), "--to", "erp",
                     "--erp-width", "64"})
                    .code == kExitOk);
        CHECK(read_png(t.path / "a2e.png").width() == 64);
}

TEST_CASE("exit codes and no partial output")
{
        TempDir t;
        const fs::path erp = write_erp(t.path / "pano.png");
        const fs::path out = t.path / "out.png";

        CHECK(cli({"convert", erp.string(), out.string()}).code == kExitConfig);
        CHECK(cli({"convert", erp.string(), out.string(), "--to", "sphere"}).code == kExitConfig);
        CHECK(cli({"convert", erp.string(), out.string(), "--to", "viewpoint", "--n", "1"}).code == kExitConfig);
        CHECK(cli({"convert", erp.string(), out.string(), "--to", "erp", "--erp-width", "33"}).code == kExitConfig);
        CHECK(cli({"convert", erp.string(), out.string(), "--to", "erp", "--threads", "0"}).code == kExitConfig);
        CHECK(cli({"convert", erp.string(), out.string(), "--bogus"}).code == kExitConfig);
        CHECK(cli({"frobnicate"}).code == kExitConfig);
        CHECK(cli({"convert", (t.path / "missing.png").string(), out.string(), "--to", "erp"}).code == kExitIo);
        CHECK(cli({"convert", erp.string(), out.string(), "--to", "erp", "--from", "viewpoint"}).code == kExitShape);
        CHECK_FALSE(fs::exists(out));

        // A frame that disagrees with the manifest fails the whole job before anything lands.
        const fs::path seq = write_sequence(t.path / "seq", 3);
        write_png(seq / frame_name(2), ImageBuffer(64, 32, 3, ColorSpace::Srgb));
        const Run r = cli({"convert", seq.string(), (t.path / "seq_out").string(), "--to", "viewpoint"});
        CHECK(r.code == kExitShape);
        CHECK_FALSE(fs::exists(t.path / "seq_out"));
        for (const auto& e : fs::directory_iterator(t.path))
        {
                CHECK(e.path().filename().string()[0] != '.');
        }
}

TEST_CASE("config file precedence")
{
        TempDir t;
        const fs::path erp = write_erp(t.path / "pano.png");
        write_file_atomic(t.path / "job.cfg", "to = viewpoint\nn = 20\n");
        REQUIRE(cli({"convert", erp.string(), (t.path / "a.png").string(), "--config", (t.path / "job.cfg").string()})
                    .code == kExitOk);
        CHECK(read_viewpoint_sidecar(t.path / "a.png") == 20);
        REQUIRE(cli({"convert", erp.string(), (t.path / "b.png").string(), "--config", (t.path / "job.cfg").string(),
                     "--n", "12"})
                    .code == kExitOk);
        CHECK(read_viewpoint_sidecar(t.path / "b.png") == 12);

        write_file_atomic(t.path / "bad.cfg", "colour = blue\n");
        CHECK(cli({"convert", erp.string(), (t.path / "c.png").string(), "--config", (t.path / "bad.cfg").string()})
                  .code == kExitConfig);
        CHECK(cli({"convert", erp.string(), (t.path / "c.png").string(), "--config", (t.path / "none.cfg").string()})
                  .code == kExitConfig);
}

TEST_CASE("sequences are identical for any thread count")
{
        TempDir t;
        const fs::path seq = write_sequence(t.path / "seq", 4);
        REQUIRE(cli({"convert", seq.string(), (t.path / "one").string(), "--to", "viewpoint", "--fuse", "--threads",
                     "1"})
                    .code == kExitOk);
        REQUIRE(cli({"convert", seq.string(), (t.path / "many").string(), "--to", "viewpoint", "--fuse", "--threads",
                     "8"})
                    .code == kExitOk);
        CHECK(slurp_tree(t.path / "one") == slurp_tree(t.path / "many"));
        const Manifest m = read_manifest(t.path / "one");
        CHECK(m.representation == Representation::Viewpoint);
        CHECK(m.frames == 4);
        CHECK(m.n == 32);

        REQUIRE(cli({"convert", seq.string(), (t.path / "cubes").string(), "--to", "cubemap"}).code == kExitOk);
        CHECK(fs::exists(t.path / "cubes" / "000003" / "D.png"));
        REQUIRE(cli({"convert", (t.path / "cubes").string(), (t.path / "erps").string(), "--to", "erp"}).code ==
                kExitOk);
        CHECK(read_manifest(t.path / "erps").width == 128);
}

TEST_CASE("fuse in place")
{
        TempDir t;
        const fs::path erp = write_erp(t.path / "pano.png");
        const fs::path vp = t.path / "vp.png";
        REQUIRE(cli({"convert", erp.string(), vp.string(), "--to", "viewpoint"}).code == kExitOk);
        const std::string before = read_file(vp);
        REQUIRE(cli({"fuse", vp.string()}).code == kExitOk);
        CHECK(read_viewpoint_sidecar(vp) == 32);
        CHECK(read_png(vp).width() == 128);
        (void)before;
        CHECK(cli({"fuse", erp.string(), (t.path / "x.png").string()}).code == kExitShape);

        const fs::path seq = write_sequence(t.path / "seq", 2);
        REQUIRE(cli({"convert", seq.string(), (t.path / "vps").string(), "--to", "viewpoint"}).code == kExitOk);
        REQUIRE(cli({"fuse", (t.path / "vps").string()}).code == kExitOk);
        CHECK(read_manifest(t.path / "vps").frames == 2);
        CHECK(cli({"fuse", seq.string()}).code == kExitConfig);
}

TEST_CASE("mask and extract")
{
        TempDir t;
        ImageBuffer frame(48, 48, 3, ColorSpace::Srgb);
        frame.fill(0.6f);
        write_png(t.path / "frame.png", frame);
        REQUIRE(cli({"mask", (t.path / "frame.png").string(), (t.path / "m").string(), "--n", "16", "--yaw", "30"})
                    .code == kExitOk);
        const ImageBuffer mask = read_png(t.path / "m" / "mask.png");
        CHECK(mask.channels() == 1);
        CHECK(mask.width() == 64);
        CHECK(read_viewpoint_sidecar(t.path / "m" / "condition.png") == 16);
        CHECK(cli({"mask", (t.path / "frame.png").string(), (t.path / "m2").string(), "--hfov", "180"}).code ==
              kExitConfig);

        const fs::path erp = write_erp(t.path / "pano.png");
        REQUIRE(cli({"extract", erp.string(), (t.path / "six").string(), "--six"}).code == kExitOk);
        CHECK(read_png(t.path / "six" / "B.png").width() == 32);
        REQUIRE(cli({"extract", erp.string(), (t.path / "view.png").string(), "--yaw", "45", "--hfov", "60",
                     "--width", "40", "--height", "30"})
                    .code == kExitOk);
        CHECK(read_png(t.path / "view.png").height() == 30);

        const fs::path seq = write_sequence(t.path / "seq", 2);
        REQUIRE(cli({"extract", seq.string(), (t.path / "views").string(), "--pitch", "10"}).code == kExitOk);
        const Manifest m = read_manifest(t.path / "views");
        CHECK(m.representation == Representation::Perspective);
        CHECK(m.poses.size() == 2);
        REQUIRE(cli({"mask", (t.path / "views").string(), (t.path / "masks").string()}).code == kExitOk);
        CHECK(read_manifest(t.path / "masks" / "mask").frames == 2);
}

TEST_CASE("roundtrip report and threshold")
{
        TempDir t;
        const fs::path report = t.path / "rt.json";
        const Run ok = cli({"roundtrip", "--synthetic", "--erp-width", "256", "--report", report.string()});
        CHECK(ok.code == kExitOk);
        const auto j = nlohmann::json::parse(read_file(report));
        CHECK(j["schema"] == 1);
        CHECK(j["pass"] == true);
        CHECK(j["n"] == 64);
        CHECK(j["baseline"]["target"] == "cubemap");
        CHECK(j["psnr_db"].get<double>() > 32);

        CHECK(cli({"roundtrip", "--synthetic", "--erp-width", "256", "--psnr-min", "200"}).code == kExitThreshold);
        CHECK(cli({"roundtrip", "--synthetic", "--erp-width", "256", "--to", "cubemap"}).code == kExitOk);
        CHECK(cli({"roundtrip", "--synthetic", "--to", "erp"}).code == kExitConfig);

        const fs::path erp = write_erp(t.path / "pano.png");
        CHECK(cli({"roundtrip", erp.string(), "--fuse"}).code == kExitOk);
}
