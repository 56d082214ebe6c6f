#include <vpk/io.hpp>

#include <json.hpp>
#include <png.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

namespace vpk
{
namespace fs = std::filesystem;

namespace
{
struct FileCloser
{
        void operator()(std::FILE* f) const
        {
                if (f)
                {
                        std::fclose(f);
                }
        }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

fs::path temp_sibling(const fs::path& path)
{
        static std::atomic<unsigned> counter{0};
        const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
        return path.parent_path() /
               ("." + path.filename().string() + ".tmp" + std::to_string(tid % 100000) + "_" +
                std::to_string(counter++));
}

int png_color_type(int channels)
{
        switch (channels)
        {
        case 1:
                return PNG_COLOR_TYPE_GRAY;
        case 3:
                return PNG_COLOR_TYPE_RGB;
        case 4:
                return PNG_COLOR_TYPE_RGBA;
        default:
                throw IoError("PNG output supports 1, 3 or 4 channels");
        }
}

void commit(const fs::path& tmp, const fs::path& path)
{
        std::error_code ec;
        fs::rename(tmp, path, ec);
        if (ec)
        {
                fs::remove(tmp, ec);
                throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
        }
}
}

ImageBuffer read_png(const fs::path& path)
{
        FilePtr fp(std::fopen(path.string().c_str(), "rb"));
        if (!fp)
        {
                throw IoError("cannot open " + path.string());
        }
        png_byte sig[8];
        if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        {
                throw IoError(path.string() + " is not a PNG file");
        }

        png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        png_infop info = png ? png_create_info_struct(png) : nullptr;
        if (!png || !info)
        {
                png_destroy_read_struct(&png, &info, nullptr);
                throw IoError("libpng initialisation failed");
        }
        std::vector<png_byte> pixels;
        std::vector<png_bytep> rows;
        if (setjmp(png_jmpbuf(png)))
        {
                png_destroy_read_struct(&png, &info, nullptr);
                throw IoError("corrupt PNG " + path.string());
        }
        png_init_io(png, fp.get());
        png_set_sig_bytes(png, 8);
        png_read_info(png, info);

        png_set_strip_16(png);
        png_set_packing(png);
        const int color_type = png_get_color_type(png, info);
        if (color_type == PNG_COLOR_TYPE_PALETTE)
        {
                png_set_palette_to_rgb(png);
        }
        if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
        {
                png_set_expand_gray_1_2_4_to_8(png);
        }
        if (png_get_valid(png, info, PNG_INFO_tRNS))
        {
                png_set_tRNS_to_alpha(png);
        }
        if (color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
        {
                png_set_gray_to_rgb(png);
        }
        png_read_update_info(png, info);

        const int w = static_cast<int>(png_get_image_width(png, info));
        const int h = static_cast<int>(png_get_image_height(png, info));
        const int nc = png_get_channels(png, info);
        const std::size_t stride = png_get_rowbytes(png, info);
        pixels.resize(stride * h);
        rows.resize(h);
        for (int y = 0; y < h; ++y)
        {
                rows[y] = pixels.data() + stride * y;
        }
        png_read_image(png, rows.data());
        png_read_end(png, nullptr);
        png_destroy_read_struct(&png, &info, nullptr);

        ImageBuffer img(w, h, nc, nc == 1 ? ColorSpace::Linear : ColorSpace::Srgb);
        for (int y = 0; y < h; ++y)
        {
                auto row = img.row(y);
                for (std::size_t k = 0; k < row.size(); ++k)
                {
                        row[k] = rows[y][k] / 255.0f;
                }
        }
        return img;
}

void write_png(const fs::path& path, const ImageBuffer& img)
{
        const int color_type = png_color_type(img.channels());

        const fs::path tmp = temp_sibling(path);
        {
                FilePtr fp(std::fopen(tmp.string().c_str(), "wb"));
                if (!fp)
                {
                        throw IoError("cannot create " + tmp.string());
                }
                png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
                png_infop info = png ? png_create_info_struct(png) : nullptr;
                if (!png || !info)
                {
                        png_destroy_write_struct(&png, &info);
                        throw IoError("libpng initialisation failed");
                }
                std::vector<png_byte> row(static_cast<std::size_t>(img.width()) * img.channels());
                if (setjmp(png_jmpbuf(png)))
                {
                        png_destroy_write_struct(&png, &info);
                        fp.reset();
                        std::error_code ec;
                        fs::remove(tmp, ec);
                        throw IoError("failed writing " + path.string());
                }
                png_init_io(png, fp.get());
                png_set_IHDR(png, info, img.width(), img.height(), 8, color_type, PNG_INTERLACE_NONE,
                             PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
                png_write_info(png, info);
                for (int y = 0; y < img.height(); ++y)
                {
                        const auto src = img.row(y);
                        for (std::size_t k = 0; k < src.size(); ++k)
                        {
                                const float v = std::clamp(src[k], 0.0f, 1.0f);
                                row[k] = static_cast<png_byte>(std::lround(v * 255.0f));
                        }
                        png_write_row(png, row.data());
                }
                png_write_end(png, nullptr);
                png_destroy_write_struct(&png, &info);
                if (std::fflush(fp.get()) != 0)
                {
                        throw IoError("failed flushing " + tmp.string());
                }
        }
        commit(tmp, path);
}

void write_file_atomic(const fs::path& path, const std::string& bytes)
{
        const fs::path tmp = temp_sibling(path);
        {
                std::ofstream out(tmp, std::ios::binary);
                if (!out)
                {
                        throw IoError("cannot create " + tmp.string());
                }
                out << bytes;
                if (!out.flush())
                {
                        throw IoError("failed writing " + tmp.string());
                }
        }
        commit(tmp, path);
}

std::string read_file(const fs::path& path)
{
        std::ifstream in(path, std::ios::binary);
        if (!in)
        {
                throw IoError("cannot open " + path.string());
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
}

fs::path viewpoint_sidecar_path(const fs::path& png)
{
        fs::path p = png;
        p.replace_extension(".json");
        return p;
}

void write_viewpoint_sidecar(const fs::path& png, int n)
{
        const nlohmann::json j{{"n", n}, {"layout_version", 1}};
        write_file_atomic(viewpoint_sidecar_path(png), j.dump(2) + "\n");
}

std::optional<int> read_viewpoint_sidecar(const fs::path& png)
{
        const fs::path p = viewpoint_sidecar_path(png);
        if (!fs::exists(p))
        {
                return std::nullopt;
        }
        try
        {
                const auto j = nlohmann::json::parse(read_file(p));
                if (j.value("layout_version", 1) != 1)
                {
                        throw IoError("unsupported ViewPoint layout version in " + p.string());
                }
                return j.at("n").get<int>();
        }
        catch (const nlohmann::json::exception& e)
        {
                throw IoError("malformed sidecar " + p.string() + ": " + e.what());
        }
}

void write_cubemap_dir(const fs::path& dir, const CubemapImage& cm)
{
        fs::create_directories(dir);
        for (FaceId f : kAllFaces)
        {
                write_png(dir / (std::string(face_name(f)) + ".png"), cm.face(f));
        }
}

CubemapImage read_cubemap(const fs::path& path)
{
        if (!fs::is_directory(path))
        {
                return cubemap_from_atlas(read_png(path));
        }
        std::array<ImageBuffer, 6> faces;
        for (FaceId f : kAllFaces)
        {
                faces[static_cast<int>(f)] = read_png(path / (std::string(face_name(f)) + ".png"));
        }
        return CubemapImage(std::move(faces));
}

std::string representation_name(Representation r)
{
        switch (r)
        {
        case Representation::Erp:
                return "erp";
        case Representation::Cubemap:
                return "cubemap";
        case Representation::Viewpoint:
                return "viewpoint";
        case Representation::Perspective:
                return "perspective";
        }
        return "erp";
}

std::optional<Representation> representation_from_name(const std::string& name)
{
        for (Representation r : {Representation::Erp, Representation::Cubemap, Representation::Viewpoint,
                                 Representation::Perspective})
        {
                if (representation_name(r) == name)
                {
                        return r;
                }
        }
        return std::nullopt;
}

CameraPose PoseDegrees::to_pose() const
{
        constexpr double k = kPi / 180;
        CameraPose p{yaw * k, pitch * k, roll * k, hfov * k, vfov * k};
        p.validate();
        return p;
}

bool is_sequence_dir(const fs::path& p)
{
        return fs::is_directory(p) && fs::exists(p / kManifestName);
}

Manifest read_manifest(const fs::path& dir)
{
        const fs::path p = dir / kManifestName;
        Manifest m;
        try
        {
                const auto j = nlohmann::json::parse(read_file(p));
                if (j.at("schema").get<int>() != Manifest::kSchema)
                {
                        throw IoError("unsupported manifest schema in " + p.string());
                }
                const auto rep = representation_from_name(j.at("representation").get<std::string>());
                if (!rep)
                {
                        throw IoError("unknown representation in " + p.string());
                }
                m.representation = *rep;
                m.frames = j.at("frames").get<int>();
                m.fps = j.at("fps").get<double>();
                m.width = j.at("width").get<int>();
                m.height = j.at("height").get<int>();
                if (j.contains("n"))
                {
                        m.n = j["n"].get<int>();
                }
                if (j.contains("face_side"))
                {
                        m.face_side = j["face_side"].get<int>();
                }
                if (j.contains("poses"))
                {
                        for (const auto& pj : j["poses"])
                        {
                                PoseDegrees pd;
                                pd.yaw = pj.value("yaw", 0.0);
                                pd.pitch = pj.value("pitch", 0.0);
                                pd.roll = pj.value("roll", 0.0);
                                pd.hfov = pj.value("hfov", 90.0);
                                pd.vfov = pj.value("vfov", 90.0);
                                m.poses.push_back(pd);
                        }
                }
        }
        catch (const nlohmann::json::exception& e)
        {
                throw IoError("malformed manifest " + p.string() + ": " + e.what());
        }
        if (m.frames < 0)
        {
                throw IoError("negative frame count in " + p.string());
        }
        return m;
}

std::string manifest_to_json(const Manifest& m)
{
        nlohmann::json j{{"schema", Manifest::kSchema},
                         {"representation", representation_name(m.representation)},
                         {"frames", m.frames},
                         {"fps", m.fps},
                         {"width", m.width},
                         {"height", m.height}};
        if (m.n)
        {
                j["n"] = *m.n;
        }
        if (m.face_side)
        {
                j["face_side"] = *m.face_side;
        }
        if (!m.poses.empty())
        {
                auto arr = nlohmann::json::array();
                for (const auto& p : m.poses)
                {
                        arr.push_back({{"yaw", p.yaw}, {"pitch", p.pitch}, {"roll", p.roll}, {"hfov", p.hfov},
                                       {"vfov", p.vfov}});
                }
                j["poses"] = arr;
        }
        return j.dump(2) + "\n";
}

void write_manifest(const fs::path& dir, const Manifest& m)
{
        write_file_atomic(dir / kManifestName, manifest_to_json(m));
}

std::string frame_name(int index, bool directory)
{
        char buf[32];
        std::snprintf(buf, sizeof buf, "%06d", index);
        return directory ? std::string(buf) : std::string(buf) + ".png";
}

}
