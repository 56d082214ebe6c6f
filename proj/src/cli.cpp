#include <vpk/cli.hpp>
#include <vpk/config.hpp>
#include <vpk/cubemap.hpp>
#include <vpk/erp.hpp>
#include <vpk/fusion.hpp>
#include <vpk/io.hpp>
#include <vpk/metrics.hpp>
#include <vpk/selftest.hpp>
#include <vpk/tensor_layout.hpp>
#include <vpk/viewpoint.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace vpk
{
namespace fs = std::filesystem;

namespace
{
// ---- settings -------------------------------------------------------------------------------

// Raw flag values; a value only counts if its option was given on the command line.
struct Flags
{
        std::string input;
        std::string output;
        std::string from;
        std::string to;
        std::string report;
        std::string config;
        int n = 0;
        int face_side = 0;
        int erp_width = 0;
        int width = 0;
        int height = 0;
        int threads = 1;
        int cutoff = 0;
        std::uint64_t seed = 0;
        double yaw = 0;
        double pitch = 0;
        double roll = 0;
        double hfov = 90;
        double vfov = 90;
        double psnr_min = 32;
        bool fuse = false;
        bool six = false;
        bool synthetic = false;
};

const std::set<std::string> kConfigKeys{"input",  "output", "from",     "to",     "n",        "face_side",
                                        "erp_width", "width", "height", "threads", "yaw",     "pitch",
                                        "roll",   "hfov",   "vfov",     "fuse",   "six",      "psnr_min",
                                        "report", "synthetic", "seed",  "cutoff"};

template <class T>
T parse_number(const std::string& key, const std::string& text)
{
        T v{};
        const char* end = text.data() + text.size();
        const auto [p, ec] = std::from_chars(text.data(), end, v);
        if (ec != std::errc() || p != end)
        {
                throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
        }
        return v;
}

bool parse_bool(const std::string& key, const std::string& text)
{
        if (text == "true" || text == "1" || text == "yes" || text == "on")
        {
                return true;
        }
        if (text == "false" || text == "0" || text == "no" || text == "off")
        {
                return false;
        }
        throw ConfigError("config key '" + key + "': expected a boolean, got '" + text + "'");
}

// Flags > config file > defaults.
class Settings
{
public:
        Settings(std::map<std::string, std::vector<CLI::Option*>> options, std::map<std::string, std::string> file)
            : options_(std::move(options)), file_(std::move(file))
        {
                for (const auto& [k, v] : file_)
                {
                        if (!kConfigKeys.count(k))
                        {
                                throw ConfigError("unknown config key '" + k + "'");
                        }
                }
        }

        bool given(const std::string& key) const
        {
                const auto it = options_.find(key);
                if (it == options_.end())
                {
                        return false;
                }
                for (const CLI::Option* o : it->second)
                {
                        if (o->count() > 0)
                        {
                                return true;
                        }
                }
                return false;
        }

        std::optional<std::string> text(const std::string& key, const std::string& flag) const
        {
                if (given(key))
                {
                        return flag;
                }
                return from_file(key);
        }

        template <class T>
        std::optional<T> number(const std::string& key, T flag) const
        {
                if (given(key))
                {
                        return flag;
                }
                if (const auto s = from_file(key))
                {
                        return parse_number<T>(key, *s);
                }
                return std::nullopt;
        }

        bool boolean(const std::string& key, bool flag) const
        {
                if (given(key))
                {
                        return flag;
                }
                if (const auto s = from_file(key))
                {
                        return parse_bool(key, *s);
                }
                return false;
        }

private:
        std::optional<std::string> from_file(const std::string& key) const
        {
                const auto it = file_.find(key);
                if (it == file_.end())
                {
                        return std::nullopt;
                }
                return it->second;
        }

        std::map<std::string, std::vector<CLI::Option*>> options_;
        std::map<std::string, std::string> file_;
};

struct JobConfig
{
        std::optional<fs::path> input;
        std::optional<fs::path> output;
        std::optional<Representation> from;
        std::optional<Representation> to;
        std::optional<int> n;
        std::optional<int> face_side;
        std::optional<int> erp_width;
        std::optional<int> width;
        std::optional<int> height;
        PoseDegrees pose;
        bool fuse = false;
        bool six = false;
        bool synthetic = false;
        int threads = 1;
        double psnr_min = 32;
        std::optional<fs::path> report;
        std::uint64_t seed = kFixtureSeed;
        int cutoff = kFixtureCutoff;
};

std::optional<Representation> representation_setting(const Settings& s, const std::string& key,
                                                     const std::string& flag)
{
        const auto t = s.text(key, flag);
        if (!t)
        {
                return std::nullopt;
        }
        const auto r = representation_from_name(*t);
        if (!r)
        {
                throw ConfigError("--" + key + ": unknown representation '" + *t + "'");
        }
        return r;
}

void require_positive(const std::optional<int>& v, const char* name, int min)
{
        if (v && *v < min)
        {
                throw ConfigError(std::string("--") + name + " must be at least " + std::to_string(min));
        }
}

JobConfig resolve(const Settings& s, const Flags& f)
{
        JobConfig c;
        if (const auto v = s.text("input", f.input))
        {
                c.input = *v;
        }
        if (const auto v = s.text("output", f.output))
        {
                c.output = *v;
        }
        if (const auto v = s.text("report", f.report))
        {
                c.report = *v;
        }
        c.from = representation_setting(s, "from", f.from);
        c.to = representation_setting(s, "to", f.to);
        c.n = s.number("n", f.n);
        c.face_side = s.number("face_side", f.face_side);
        c.erp_width = s.number("erp_width", f.erp_width);
        c.width = s.number("width", f.width);
        c.height = s.number("height", f.height);
        c.threads = s.number("threads", f.threads).value_or(1);
        c.pose.yaw = s.number("yaw", f.yaw).value_or(0.0);
        c.pose.pitch = s.number("pitch", f.pitch).value_or(0.0);
        c.pose.roll = s.number("roll", f.roll).value_or(0.0);
        c.pose.hfov = s.number("hfov", f.hfov).value_or(90.0);
        c.pose.vfov = s.number("vfov", f.vfov).value_or(90.0);
        c.psnr_min = s.number("psnr_min", f.psnr_min).value_or(32.0);
        c.seed = s.number("seed", f.seed).value_or(kFixtureSeed);
        c.cutoff = s.number("cutoff", f.cutoff).value_or(kFixtureCutoff);
        c.fuse = s.boolean("fuse", f.fuse);
        c.six = s.boolean("six", f.six);
        c.synthetic = s.boolean("synthetic", f.synthetic);

        require_positive(c.n, "n", 2);
        require_positive(c.face_side, "face-side", 2);
        require_positive(c.erp_width, "erp-width", 2);
        require_positive(c.width, "width", 1);
        require_positive(c.height, "height", 1);
        if (c.erp_width && *c.erp_width % 2 != 0)
        {
                throw ConfigError("--erp-width must be even");
        }
        if (c.threads < 1)
        {
                throw ConfigError("--threads must be at least 1");
        }
        if (c.cutoff < 1)
        {
                throw ConfigError("--cutoff must be at least 1");
        }
        try
        {
                c.pose.to_pose();
        }
        catch (const DomainError& e)
        {
                throw ConfigError(std::string("camera pose: ") + e.what());
        }
        return c;
}

fs::path need_input(const JobConfig& c)
{
        if (!c.input)
        {
                throw ConfigError("missing input path");
        }
        if (!fs::exists(*c.input))
        {
                throw IoError("input " + c.input->string() + " does not exist");
        }
        return *c.input;
}

fs::path need_output(const JobConfig& c)
{
        if (!c.output)
        {
                throw ConfigError("missing output path");
        }
        return *c.output;
}

// ---- panoramas ------------------------------------------------------------------------------

using Pano = std::variant<ErpImage, CubemapImage, ViewPointImage>;

struct SourceSpec
{
        Representation rep = Representation::Erp;
        ImageDims erp;
        int face_side = 0;
        int n = 0;
};

SourceSpec spec_of(const Pano& p)
{
        SourceSpec s;
        if (const auto* e = std::get_if<ErpImage>(&p))
        {
                s.rep = Representation::Erp;
                s.erp = e->dims();
        }
        else if (const auto* c = std::get_if<CubemapImage>(&p))
        {
                s.rep = Representation::Cubemap;
                s.face_side = c->face_side();
        }
        else
        {
                s.rep = Representation::Viewpoint;
                s.n = std::get<ViewPointImage>(p).layout().n();
        }
        return s;
}

bool same_spec(const SourceSpec& a, const SourceSpec& b)
{
        return a.rep == b.rep && a.erp.width == b.erp.width && a.erp.height == b.erp.height &&
               a.face_side == b.face_side && a.n == b.n;
}

std::vector<ImageBuffer> planes_of(const Pano& p)
{
        if (const auto* e = std::get_if<ErpImage>(&p))
        {
                return {e->buffer()};
        }
        if (const auto* c = std::get_if<CubemapImage>(&p))
        {
                return {c->planes().begin(), c->planes().end()};
        }
        const auto tiles = std::get<ViewPointImage>(p).tiles();
        return {tiles.begin(), tiles.end()};
}

std::unique_ptr<SourceGeometry> make_geometry(const SourceSpec& s, bool fuse)
{
        switch (s.rep)
        {
        case Representation::Erp:
                return std::make_unique<ErpGeometry>(s.erp);
        case Representation::Cubemap:
                return std::make_unique<CubemapGeometry>(s.face_side);
        case Representation::Viewpoint:
                return std::make_unique<ViewPointGeometry>(ViewPointLayout(s.n), fuse);
        case Representation::Perspective:
                break;
        }
        throw ConfigError("perspective frames cannot be used as a panorama source");
}

ViewPointImage make_viewpoint(ImageBuffer img, int n)
{
        if (img.width() != img.height() || img.width() != 4 * n)
        {
                throw ShapeMismatch("ViewPoint map must be " + std::to_string(4 * n) + " pixels square for n=" +
                                    std::to_string(n));
        }
        return ViewPointImage(std::move(img), ViewPointLayout(n));
}

// Single image: a cubemap face directory or a PNG whose kind comes from --from, a ViewPoint sidecar,
// or its aspect ratio.
Pano load_single(const fs::path& path, std::optional<Representation> from)
{
        if (fs::is_directory(path))
        {
                if (from && *from != Representation::Cubemap)
                {
                        throw ConfigError(path.string() + " is a directory but --from is " + representation_name(*from));
                }
                return read_cubemap(path);
        }
        ImageBuffer img = read_png(path);
        const std::optional<int> sidecar = read_viewpoint_sidecar(path);
        Representation rep;
        if (from)
        {
                rep = *from;
        }
        else if (sidecar)
        {
                rep = Representation::Viewpoint;
        }
        else if (img.width() == 2 * img.height())
        {
                rep = Representation::Erp;
        }
        else if (2 * img.width() == 3 * img.height())
        {
                rep = Representation::Cubemap;
        }
        else if (img.width() == img.height())
        {
                rep = Representation::Viewpoint;
        }
        else
        {
                throw ShapeMismatch("cannot tell the representation of a " + std::to_string(img.width()) + "x" +
                                    std::to_string(img.height()) + " image; pass --from");
        }

        switch (rep)
        {
        case Representation::Erp:
                return ErpImage(std::move(img));
        case Representation::Cubemap:
                return cubemap_from_atlas(img);
        case Representation::Viewpoint:
                return make_viewpoint(std::move(img), sidecar ? *sidecar : img.width() / 4);
        case Representation::Perspective:
                break;
        }
        throw ConfigError("perspective frames cannot be used as a panorama source");
}

void check_frame_dims(const ImageBuffer& img, const Manifest& m, const fs::path& path)
{
        if (img.width() != m.width || img.height() != m.height)
        {
                throw ShapeMismatch(path.string() + " is " + std::to_string(img.width()) + "x" +
                                    std::to_string(img.height()) + ", manifest says " + std::to_string(m.width) +
                                    "x" + std::to_string(m.height));
        }
}

ImageBuffer load_frame_png(const fs::path& dir, int index, const Manifest& m)
{
        const fs::path p = dir / frame_name(index);
        ImageBuffer img = read_png(p);
        check_frame_dims(img, m, p);
        return img;
}

Pano load_frame(const fs::path& dir, int index, const Manifest& m)
{
        switch (m.representation)
        {
        case Representation::Erp:
                return ErpImage(load_frame_png(dir, index, m));
        case Representation::Cubemap:
        {
                const fs::path p = dir / frame_name(index, true);
                CubemapImage cm = read_cubemap(p);
                check_frame_dims(cm.face(FaceId::F), m, p);
                return cm;
        }
        case Representation::Viewpoint:
                return make_viewpoint(load_frame_png(dir, index, m), m.n.value_or(m.width / 4));
        case Representation::Perspective:
                break;
        }
        throw ConfigError("perspective sequences cannot be used as a panorama source");
}

SourceSpec spec_of(const Manifest& m)
{
        SourceSpec s;
        s.rep = m.representation;
        switch (m.representation)
        {
        case Representation::Erp:
                s.erp = {m.width, m.height};
                ErpImage::check_dims(s.erp);
                break;
        case Representation::Cubemap:
                s.face_side = m.face_side.value_or(m.width);
                if (m.width != m.height || s.face_side != m.width)
                {
                        throw ShapeMismatch("cubemap manifest needs square faces of side face_side");
                }
                break;
        case Representation::Viewpoint:
                s.n = m.n.value_or(m.width / 4);
                if (m.width != m.height || m.width != 4 * s.n)
                {
                        throw ShapeMismatch("ViewPoint manifest dimensions do not match n");
                }
                break;
        case Representation::Perspective:
                throw ConfigError("perspective sequences cannot be used as a panorama source");
        }
        return s;
}

// Fixes the parent-relative form of a path so that its last component names the entry itself.
fs::path entry_path(const fs::path& p)
{
        fs::path q = p.lexically_normal();
        if (!q.has_filename())
        {
                q = q.parent_path();
        }
        return q;
}

// Fills a fresh hidden sibling directory, then swaps it into place.
void write_directory_atomic(const fs::path& target, const std::function<void(const fs::path&)>& fill)
{
        const fs::path dir = entry_path(target);
        fs::path parent = dir.parent_path();
        if (parent.empty())
        {
                parent = ".";
        }
        fs::create_directories(parent);
        const std::string stem = "." + dir.filename().string();
        const fs::path tmp = parent / (stem + ".tmp");
        const fs::path old = parent / (stem + ".old");
        fs::remove_all(tmp);
        fs::create_directory(tmp);
        try
        {
                fill(tmp);
        }
        catch (...)
        {
                std::error_code ec;
                fs::remove_all(tmp, ec);
                throw;
        }
        if (fs::exists(dir))
        {
                fs::remove_all(old);
                fs::rename(dir, old);
                fs::rename(tmp, dir);
                fs::remove_all(old);
        }
        else
        {
                fs::rename(tmp, dir);
        }
}

void save_single(const fs::path& path, const Pano& p)
{
        if (const auto* e = std::get_if<ErpImage>(&p))
        {
                write_png(path, e->buffer());
        }
        else if (const auto* c = std::get_if<CubemapImage>(&p))
        {
                if (path.extension() == ".png")
                {
                        write_png(path, cubemap_to_atlas(*c));
                }
                else
                {
                        write_directory_atomic(path, [&](const fs::path& tmp) { write_cubemap_dir(tmp, *c); });
                }
        }
        else
        {
                const auto& vp = std::get<ViewPointImage>(p);
                write_png(path, vp.buffer());
                write_viewpoint_sidecar(path, vp.layout().n());
        }
}

void save_frame(const fs::path& dir, int index, const Pano& p)
{
        if (const auto* c = std::get_if<CubemapImage>(&p))
        {
                write_cubemap_dir(dir / frame_name(index, true), *c);
        }
        else if (const auto* e = std::get_if<ErpImage>(&p))
        {
                write_png(dir / frame_name(index), e->buffer());
        }
        else
        {
                write_png(dir / frame_name(index), std::get<ViewPointImage>(p).buffer());
        }
}

// Frame-level pool: at most `threads` workers pull frame indices in order. The first failing frame's
// exception is rethrown after all workers stop.
void for_each_frame(int frames, int threads, const std::function<void(int)>& fn)
{
        const int workers = std::clamp(threads, 1, std::max(frames, 1));
        std::atomic<int> next{0};
        std::atomic<bool> failed{false};
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(frames));
        auto work = [&] {
                for (int i = next++; i < frames && !failed; i = next++)
                {
                        try
                        {
                                fn(i);
                        }
                        catch (...)
                        {
                                errors[i] = std::current_exception();
                                failed = true;
                        }
                }
        };
        if (workers == 1)
        {
                work();
        }
        else
        {
                std::vector<std::jthread> pool;
                for (int w = 0; w < workers; ++w)
                {
                        pool.emplace_back(work);
                }
        }
        for (const auto& e : errors)
        {
                if (e)
                {
                        std::rethrow_exception(e);
                }
        }
}

// Threads left for each frame once the pool has taken its share.
int inner_threads(int frames, int threads)
{
        return std::max(1, threads / std::clamp(frames, 1, threads));
}

Manifest sequence_manifest(const Manifest& like, Representation rep, int width, int height)
{
        Manifest m;
        m.representation = rep;
        m.frames = like.frames;
        m.fps = like.fps;
        m.width = width;
        m.height = height;
        return m;
}

// ---- conversion -----------------------------------------------------------------------------

struct TargetSpec
{
        Representation rep = Representation::Erp;
        ImageDims erp;
        int face_side = 0;
        int n = 0;
};

TargetSpec target_for(const JobConfig& c, const SourceSpec& src, Representation to)
{
        int base = 0;
        switch (src.rep)
        {
        case Representation::Erp:
                base = src.erp.height / 2;
                break;
        case Representation::Cubemap:
                base = src.face_side;
                break;
        default:
                base = src.n;
                break;
        }
        base = std::max(base, 2);

        TargetSpec t;
        t.rep = to;
        t.n = c.n.value_or(base);
        t.face_side = c.face_side.value_or(base);
        const int w = c.erp_width.value_or(src.rep == Representation::Erp ? src.erp.width : 4 * base);
        t.erp = {w, w / 2};
        if (to == Representation::Perspective)
        {
                throw ConfigError("convert targets erp, cubemap or viewpoint; use extract for perspective views");
        }
        return t;
}

std::pair<int, int> target_frame_dims(const TargetSpec& t)
{
        switch (t.rep)
        {
        case Representation::Erp:
                return {t.erp.width, t.erp.height};
        case Representation::Cubemap:
                return {t.face_side, t.face_side};
        default:
                return {4 * t.n, 4 * t.n};
        }
}

// Lookup tables are built once per job and reused for every frame.
class Converter
{
public:
        Converter(const SourceSpec& src, const TargetSpec& dst, bool fuse, int threads)
            : src_(src), dst_(dst), fuse_(fuse)
        {
                const auto geometry = make_geometry(src, fuse);
                switch (dst.rep)
                {
                case Representation::Erp:
                        tables_.push_back(
                            build_remap(dst.erp.width, dst.erp.height, erp_target(dst.erp), *geometry, threads));
                        break;
                case Representation::Cubemap:
                        for (FaceId f : kAllFaces)
                        {
                                const int side = dst.face_side;
                                tables_.push_back(build_remap(
                                    side, side,
                                    [f, side](double x, double y) { return face_pixel_to_direction(f, side, x, y); },
                                    *geometry, threads));
                        }
                        break;
                default:
                {
                        const ViewPointLayout layout(dst.n);
                        tables_.push_back(build_remap(layout.map_side(), layout.map_side(), viewpoint_target(layout),
                                                      *geometry, threads));
                        break;
                }
                }
        }

        Pano convert(const Pano& in, int threads) const
        {
                if (!same_spec(spec_of(in), src_))
                {
                        throw ShapeMismatch("frame does not match the sequence layout");
                }
                const auto planes = planes_of(in);
                switch (dst_.rep)
                {
                case Representation::Erp:
                        return ErpImage(apply_remap(tables_[0], planes, threads));
                case Representation::Cubemap:
                {
                        std::array<ImageBuffer, 6> faces;
                        for (std::size_t k = 0; k < faces.size(); ++k)
                        {
                                faces[k] = apply_remap(tables_[k], planes, threads);
                        }
                        return CubemapImage(std::move(faces));
                }
                default:
                {
                        ViewPointImage vp(apply_remap(tables_[0], planes, threads), ViewPointLayout(dst_.n));
                        if (fuse_)
                        {
                                return fuse_viewpoint(vp);
                        }
                        return vp;
                }
                }
        }

private:
        SourceSpec src_;
        TargetSpec dst_;
        bool fuse_;
        std::vector<RemapTable> tables_;
};

Manifest output_manifest(const Manifest& in, const TargetSpec& t)
{
        const auto [w, h] = target_frame_dims(t);
        Manifest m = sequence_manifest(in, t.rep, w, h);
        if (t.rep == Representation::Viewpoint)
        {
                m.n = t.n;
        }
        if (t.rep == Representation::Cubemap)
        {
                m.face_side = t.face_side;
        }
        return m;
}

int cmd_convert(const JobConfig& c, std::ostream& out)
{
        const fs::path in = need_input(c);
        const fs::path dst = need_output(c);
        if (!c.to)
        {
                throw ConfigError("convert needs --to");
        }
        if (c.from == Representation::Perspective)
        {
                throw ConfigError("convert reads erp, cubemap or viewpoint sources");
        }

        if (is_sequence_dir(in))
        {
                const Manifest m = read_manifest(in);
                if (c.from && *c.from != m.representation)
                {
                        throw ConfigError("--from disagrees with the manifest representation");
                }
                const SourceSpec src = spec_of(m);
                const TargetSpec t = target_for(c, src, *c.to);
                const Converter conv(src, t, c.fuse, c.threads);
                const int inner = inner_threads(m.frames, c.threads);
                write_directory_atomic(dst, [&](const fs::path& tmp) {
                        for_each_frame(m.frames, c.threads, [&](int i) {
                                save_frame(tmp, i, conv.convert(load_frame(in, i, m), inner));
                        });
                        write_manifest(tmp, output_manifest(m, t));
                });
                out << "converted " << m.frames << " frames to " << representation_name(t.rep) << "\n";
                return kExitOk;
        }

        const Pano p = load_single(in, c.from);
        const SourceSpec src = spec_of(p);
        const TargetSpec t = target_for(c, src, *c.to);
        const Converter conv(src, t, c.fuse, c.threads);
        save_single(dst, conv.convert(p, c.threads));
        out << "wrote " << dst.string() << "\n";
        return kExitOk;
}

// ---- fuse -----------------------------------------------------------------------------------

int cmd_fuse(const JobConfig& c, std::ostream& out)
{
        const fs::path in = need_input(c);
        const fs::path dst = c.output.value_or(in);
        if (c.from && *c.from != Representation::Viewpoint)
        {
                throw ConfigError("fuse works on ViewPoint maps");
        }

        if (is_sequence_dir(in))
        {
                const Manifest m = read_manifest(in);
                if (m.representation != Representation::Viewpoint)
                {
                        throw ConfigError("fuse works on ViewPoint sequences");
                }
                const SourceSpec src = spec_of(m);
                write_directory_atomic(dst, [&](const fs::path& tmp) {
                        for_each_frame(m.frames, c.threads, [&](int i) {
                                const Pano p = load_frame(in, i, m);
                                save_frame(tmp, i, fuse_viewpoint(std::get<ViewPointImage>(p)));
                        });
                        Manifest om = m;
                        om.n = src.n;
                        write_manifest(tmp, om);
                });
                out << "fused " << m.frames << " frames\n";
                return kExitOk;
        }

        const Pano p = load_single(in, Representation::Viewpoint);
        save_single(dst, fuse_viewpoint(std::get<ViewPointImage>(p)));
        out << "wrote " << dst.string() << "\n";
        return kExitOk;
}

// ---- mask -----------------------------------------------------------------------------------

// A 90 degree frame of height h covers a central face of side sqrt(2) n at matching resolution.
int default_mask_n(int frame_height)
{
        return std::max(2, static_cast<int>(std::lround(frame_height / std::sqrt(2.0))));
}

int cmd_mask(const JobConfig& c, std::ostream& out)
{
        const fs::path in = need_input(c);
        const fs::path dst = need_output(c);

        if (is_sequence_dir(in))
        {
                const Manifest m = read_manifest(in);
                if (m.representation != Representation::Perspective)
                {
                        throw ConfigError("mask expects a perspective frame sequence");
                }
                if (!m.poses.empty() && static_cast<int>(m.poses.size()) != m.frames)
                {
                        throw ShapeMismatch("manifest has " + std::to_string(m.poses.size()) + " poses for " +
                                            std::to_string(m.frames) + " frames");
                }
                std::vector<CameraPose> poses;
                for (int i = 0; i < m.frames; ++i)
                {
                        try
                        {
                                poses.push_back(m.poses.empty() ? c.pose.to_pose() : m.poses[i].to_pose());
                        }
                        catch (const DomainError& e)
                        {
                                throw ConfigError("pose of frame " + std::to_string(i) + ": " + e.what());
                        }
                }
                const ViewPointLayout layout(c.n.value_or(default_mask_n(m.height)));
                const int inner = inner_threads(m.frames, c.threads);
                write_directory_atomic(dst, [&](const fs::path& tmp) {
                        fs::create_directory(tmp / "condition");
                        fs::create_directory(tmp / "mask");
                        for_each_frame(m.frames, c.threads, [&](int i) {
                                const ImageBuffer frame = load_frame_png(in, i, m);
                                const ConditionMaps maps = project_condition(layout, poses[i], frame, inner);
                                write_png(tmp / "condition" / frame_name(i), maps.condition.buffer());
                                write_png(tmp / "mask" / frame_name(i), maps.mask.buffer());
                        });
                        Manifest om = sequence_manifest(m, Representation::Viewpoint, layout.map_side(),
                                                        layout.map_side());
                        om.n = layout.n();
                        write_manifest(tmp / "condition", om);
                        write_manifest(tmp / "mask", om);
                });
                out << "projected " << m.frames << " frames\n";
                return kExitOk;
        }

        const ImageBuffer frame = read_png(in);
        const ViewPointLayout layout(c.n.value_or(default_mask_n(frame.height())));
        const ConditionMaps maps = project_condition(layout, c.pose.to_pose(), frame, c.threads);
        write_directory_atomic(dst, [&](const fs::path& tmp) {
                save_single(tmp / "condition.png", maps.condition);
                save_single(tmp / "mask.png", maps.mask);
        });
        out << "wrote " << dst.string() << "\n";
        return kExitOk;
}

// ---- roundtrip ------------------------------------------------------------------------------

nlohmann::json report_json(const RoundTripReport& r)
{
        return nlohmann::json::parse(report_to_json(r));
}

int cmd_roundtrip(const JobConfig& c, std::ostream& out)
{
        const Representation to = c.to.value_or(Representation::Viewpoint);
        if (to != Representation::Viewpoint && to != Representation::Cubemap)
        {
                throw ConfigError("roundtrip goes through viewpoint or cubemap");
        }
        if (c.from && *c.from != Representation::Erp)
        {
                throw ConfigError("roundtrip starts from an ERP image");
        }

        ErpImage erp;
        std::string source;
        if (c.synthetic)
        {
                const int w = c.erp_width.value_or(kFixtureDims.width);
                erp = band_limited_sphere_image({w, w / 2}, c.seed, c.cutoff);
                source = "synthetic";
        }
        else
        {
                erp = ErpImage(read_png(need_input(c)));
                source = c.input->string();
        }
        const ImageDims dims = erp.dims();
        const int n = c.n.value_or(std::max(2, dims.height / 2));
        const int face_side = c.face_side.value_or(std::max(2, dims.height / 2));
        const ViewPointLayout layout(n);

        const CubemapImage cm = erp_to_cubemap(erp, face_side, c.threads);
        const RoundTripReport cp_report = roundtrip_report(erp, cubemap_to_erp(cm, dims, c.threads), layout);

        RoundTripReport report = cp_report;
        nlohmann::json extra{{"source", source},
                             {"target", representation_name(to)},
                             {"erp_width", dims.width},
                             {"erp_height", dims.height},
                             {"face_side", face_side},
                             {"psnr_min", c.psnr_min}};
        if (to == Representation::Viewpoint)
        {
                ViewPointImage vp = erp_to_viewpoint(erp, layout, c.threads);
                if (c.fuse)
                {
                        vp = fuse_viewpoint(vp);
                }
                report = roundtrip_report(erp, reconstruct_erp(vp, dims, c.fuse, c.threads), layout);
                extra["n"] = n;
                extra["fuse"] = c.fuse;
                extra["baseline"] = report_json(cp_report);
                extra["baseline"]["target"] = "cubemap";
        }
        const bool pass = report.psnr_db >= c.psnr_min;
        extra["pass"] = pass;

        const std::string json = report_to_json(report, extra.dump()) + "\n";
        if (c.report)
        {
                write_file_atomic(*c.report, json);
        }
        else
        {
                out << json;
        }
        out << "roundtrip psnr " << report.psnr_db << " dB (min " << c.psnr_min << "): " << (pass ? "pass" : "fail")
            << "\n";
        return pass ? kExitOk : kExitThreshold;
}

// ---- extract --------------------------------------------------------------------------------

struct View
{
        std::string name;
        CameraPose pose;
        ImageDims dims;
};

std::vector<View> views_for(const JobConfig& c, const SourceSpec& src)
{
        int base = 0;
        switch (src.rep)
        {
        case Representation::Erp:
                base = src.erp.height / 2;
                break;
        case Representation::Cubemap:
                base = src.face_side;
                break;
        default:
                base = src.n;
                break;
        }
        base = std::max(base, 1);

        std::vector<View> views;
        if (c.six)
        {
                const int side = c.face_side.value_or(base);
                for (FaceId f : kAllFaces)
                {
                        views.push_back({std::string(face_name(f)), CameraPose::for_face(f), {side, side}});
                }
                return views;
        }
        const int side = c.face_side.value_or(base);
        views.push_back({"view", c.pose.to_pose(), {c.width.value_or(side), c.height.value_or(side)}});
        return views;
}

int cmd_extract(const JobConfig& c, std::ostream& out)
{
        const fs::path in = need_input(c);
        const fs::path dst = need_output(c);

        const bool sequence = is_sequence_dir(in);
        std::optional<Manifest> m;
        std::optional<Pano> single;
        SourceSpec src;
        if (sequence)
        {
                m = read_manifest(in);
                if (c.from && *c.from != m->representation)
                {
                        throw ConfigError("--from disagrees with the manifest representation");
                }
                src = spec_of(*m);
        }
        else
        {
                single = load_single(in, c.from);
                src = spec_of(*single);
        }

        const std::vector<View> views = views_for(c, src);
        const auto geometry = make_geometry(src, c.fuse);
        std::vector<RemapTable> tables;
        for (const View& v : views)
        {
                tables.push_back(
                    build_remap(v.dims.width, v.dims.height, perspective_target(v.pose, v.dims), *geometry, c.threads));
        }

        if (!sequence)
        {
                const auto planes = planes_of(*single);
                if (!c.six)
                {
                        write_png(dst, apply_remap(tables[0], planes, c.threads));
                }
                else
                {
                        write_directory_atomic(dst, [&](const fs::path& tmp) {
                                for (std::size_t k = 0; k < views.size(); ++k)
                                {
                                        write_png(tmp / (views[k].name + ".png"),
                                                  apply_remap(tables[k], planes, c.threads));
                                }
                        });
                }
                out << "wrote " << dst.string() << "\n";
                return kExitOk;
        }

        const int inner = inner_threads(m->frames, c.threads);
        write_directory_atomic(dst, [&](const fs::path& tmp) {
                for_each_frame(m->frames, c.threads, [&](int i) {
                        const auto planes = planes_of(load_frame(in, i, *m));
                        if (!c.six)
                        {
                                write_png(tmp / frame_name(i), apply_remap(tables[0], planes, inner));
                                return;
                        }
                        const fs::path fdir = tmp / frame_name(i, true);
                        fs::create_directories(fdir);
                        for (std::size_t k = 0; k < views.size(); ++k)
                        {
                                write_png(fdir / (views[k].name + ".png"), apply_remap(tables[k], planes, inner));
                        }
                });
                Manifest om = sequence_manifest(*m, Representation::Perspective, views[0].dims.width,
                                                views[0].dims.height);
                if (!c.six)
                {
                        om.poses.assign(static_cast<std::size_t>(m->frames), c.pose);
                }
                write_manifest(tmp, om);
        });
        out << "extracted " << m->frames << " frames\n";
        return kExitOk;
}

// ---- selftest -------------------------------------------------------------------------------

int cmd_selftest(std::ostream& out)
{
        bool all = true;
        for (const SelfTestResult& r : run_selftest())
        {
                out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
                all = all && r.passed;
        }
        return all ? kExitOk : kExitThreshold;
}

// ---- command line ---------------------------------------------------------------------------

struct Cli
{
        CLI::App app{"ViewPoint panorama toolkit", "vpk"};
        Flags flags;
        std::map<std::string, std::vector<CLI::Option*>> options;

        void add(const std::string& key, CLI::Option* o) { options[key].push_back(o); }

        void io(CLI::App* s, bool output)
        {
                add("input", s->add_option("input", flags.input, "Input image, cubemap directory or sequence"));
                if (output)
                {
                        add("output", s->add_option("output", flags.output, "Output path"));
                }
                add("from", s->add_option("--from", flags.from, "Source representation (erp, cubemap, viewpoint)"));
                add("threads", s->add_option("--threads", flags.threads, "Worker threads"));
                s->add_option("--config", flags.config, "key = value settings file; flags take precedence");
        }

        void layout(CLI::App* s)
        {
                add("n", s->add_option("--n", flags.n, "ViewPoint quadrant side"));
                add("face_side", s->add_option("--face-side", flags.face_side, "Cubemap face side"));
                add("erp_width", s->add_option("--erp-width", flags.erp_width, "ERP output width"));
        }

        void pose(CLI::App* s)
        {
                add("yaw", s->add_option("--yaw", flags.yaw, "Camera yaw, degrees"));
                add("pitch", s->add_option("--pitch", flags.pitch, "Camera pitch, degrees"));
                add("roll", s->add_option("--roll", flags.roll, "Camera roll, degrees"));
                add("hfov", s->add_option("--hfov", flags.hfov, "Horizontal field of view, degrees"));
                add("vfov", s->add_option("--vfov", flags.vfov, "Vertical field of view, degrees"));
        }

        Cli()
        {
                app.require_subcommand(1);

                auto* convert = app.add_subcommand("convert", "Convert between erp, cubemap and viewpoint");
                io(convert, true);
                layout(convert);
                add("to", convert->add_option("--to", flags.to, "Target representation"));
                add("fuse", convert->add_flag("--fuse", flags.fuse,
                                              "Fuse overlaps of a ViewPoint target, blend them when reading one"));

                auto* fuse = app.add_subcommand("fuse", "Fuse the overlaps of a ViewPoint map or sequence");
                io(fuse, true);

                auto* mask = app.add_subcommand("mask", "Project a perspective frame into a ViewPoint condition map");
                io(mask, true);
                add("n", mask->add_option("--n", flags.n, "ViewPoint quadrant side"));
                pose(mask);

                auto* rt = app.add_subcommand("roundtrip", "ERP -> target -> ERP fidelity report");
                add("input", rt->add_option("input", flags.input, "Input ERP image"));
                add("from", rt->add_option("--from", flags.from, "Source representation (erp)"));
                add("threads", rt->add_option("--threads", flags.threads, "Worker threads"));
                rt->add_option("--config", flags.config, "key = value settings file; flags take precedence");
                layout(rt);
                add("to", rt->add_option("--to", flags.to, "viewpoint (default) or cubemap"));
                add("fuse", rt->add_flag("--fuse", flags.fuse, "Fuse the map and blend overlaps on the way back"));
                add("psnr_min", rt->add_option("--psnr-min", flags.psnr_min, "Exit 1 below this PSNR (dB)"));
                add("report", rt->add_option("--report", flags.report, "Write the JSON report here"));
                add("synthetic", rt->add_flag("--synthetic", flags.synthetic, "Use the band-limited test sphere"));
                add("seed", rt->add_option("--seed", flags.seed, "Synthetic sphere seed"));
                add("cutoff", rt->add_option("--cutoff", flags.cutoff, "Synthetic sphere degree cutoff"));

                auto* extract = app.add_subcommand("extract", "Render perspective views from a panorama");
                io(extract, true);
                pose(extract);
                add("face_side", extract->add_option("--face-side", flags.face_side, "Side of the six face views"));
                add("width", extract->add_option("--width", flags.width, "View width"));
                add("height", extract->add_option("--height", flags.height, "View height"));
                add("six", extract->add_flag("--six", flags.six, "The six 90 degree cube-face views"));
                add("fuse", extract->add_flag("--fuse", flags.fuse, "Blend ViewPoint overlaps"));

                app.add_subcommand("selftest", "Run the embedded invariant checks");
        }
};

int dispatch(Cli& cli, std::ostream& out)
{
        CLI::App* sub = cli.app.get_subcommands().front();
        const std::string name = sub->get_name();
        if (name == "selftest")
        {
                return cmd_selftest(out);
        }

        std::map<std::string, std::string> file;
        if (!cli.flags.config.empty())
        {
                std::string text;
                try
                {
                        text = read_file(cli.flags.config);
                }
                catch (const IoError& e)
                {
                        throw ConfigError(std::string("config file: ") + e.what());
                }
                file = parse_config(text);
        }
        const Settings settings(cli.options, std::move(file));
        const JobConfig cfg = resolve(settings, cli.flags);

        if (name == "convert")
        {
                return cmd_convert(cfg, out);
        }
        if (name == "fuse")
        {
                return cmd_fuse(cfg, out);
        }
        if (name == "mask")
        {
                return cmd_mask(cfg, out);
        }
        if (name == "roundtrip")
        {
                return cmd_roundtrip(cfg, out);
        }
        return cmd_extract(cfg, out);
}
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
        Cli cli;
        try
        {
                cli.app.parse(argc, argv);
        }
        catch (const CLI::CallForHelp&)
        {
                out << cli.app.help();
                return kExitOk;
        }
        catch (const CLI::CallForAllHelp&)
        {
                out << cli.app.help("", CLI::AppFormatMode::All);
                return kExitOk;
        }
        catch (const CLI::ParseError& e)
        {
                err << "vpk: " << e.what() << "\n";
                return kExitConfig;
        }

        try
        {
                return dispatch(cli, out);
        }
        catch (const ConfigError& e)
        {
                err << "vpk: config error: " << e.what() << "\n";
                return kExitConfig;
        }
        catch (const DomainError& e)
        {
                err << "vpk: invalid parameter: " << e.what() << "\n";
                return kExitConfig;
        }
        catch (const IoError& e)
        {
                err << "vpk: i/o error: " << e.what() << "\n";
                return kExitIo;
        }
        catch (const fs::filesystem_error& e)
        {
                err << "vpk: i/o error: " << e.what() << "\n";
                return kExitIo;
        }
        catch (const ShapeMismatch& e)
        {
                err << "vpk: shape error: " << e.what() << "\n";
                return kExitShape;
        }
        catch (const ShapeError& e)
        {
                err << "vpk: shape error: " << e.what() << "\n";
                return kExitShape;
        }
        catch (const UncoveredDirection& e)
        {
                err << "vpk: shape error: " << e.what() << "\n";
                return kExitShape;
        }
        catch (const std::exception& e)
        {
                err << "vpk: error: " << e.what() << "\n";
                return kExitIo;
        }
}

}
