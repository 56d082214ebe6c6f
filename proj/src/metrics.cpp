#include <vpk/metrics.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace vpk
{
namespace
{
double psnr_from_mse(double mse)
{
        if (mse == 0)
        {
                return std::numeric_limits<double>::infinity();
        }
        return 10 * std::log10(1.0 / mse);
}

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b)
{
        if (!a.same_shape(b))
        {
                throw ShapeMismatch("images differ in shape");
        }
}

struct Accum
{
        double sq = 0;
        std::size_t count = 0;

        double psnr() const { return count == 0 ? std::numeric_limits<double>::infinity() : psnr_from_mse(sq / count); }
};
}

double psnr(const ImageBuffer& a, const ImageBuffer& b)
{
        require_same_shape(a, b);
        double sq = 0;
        const auto& da = a.data();
        const auto& db = b.data();
        for (std::size_t k = 0; k < da.size(); ++k)
        {
                const double e = static_cast<double>(da[k]) - db[k];
                sq += e * e;
        }
        return psnr_from_mse(sq / static_cast<double>(da.size()));
}

double psnr_masked(const ImageBuffer& a, const ImageBuffer& b, const std::function<bool(int, int)>& include)
{
        require_same_shape(a, b);
        Accum acc;
        for (int y = 0; y < a.height(); ++y)
        {
                for (int x = 0; x < a.width(); ++x)
                {
                        if (!include(x, y))
                        {
                                continue;
                        }
                        const auto pa = a.pixel(x, y);
                        const auto pb = b.pixel(x, y);
                        for (int c = 0; c < a.channels(); ++c)
                        {
                                const double e = static_cast<double>(pa[c]) - pb[c];
                                acc.sq += e * e;
                        }
                        acc.count += a.channels();
                }
        }
        return acc.psnr();
}

RoundTripReport roundtrip_report(const ErpImage& original, const ErpImage& restored, const ViewPointLayout& layout)
{
        const ImageBuffer& a = original.buffer();
        const ImageBuffer& b = restored.buffer();
        require_same_shape(a, b);
        const ImageDims dims = original.dims();
        const int nc = a.channels();

        std::map<std::string, Accum> sub_acc;
        std::map<std::string, Accum> face_acc;
        Accum north;
        Accum south;
        double sum_abs = 0;
        double max_abs = 0;
        double sq_total = 0;

        for (int y = 0; y < dims.height; ++y)
        {
                for (int x = 0; x < dims.width; ++x)
                {
                        double sq = 0;
                        const auto pa = a.pixel(x, y);
                        const auto pb = b.pixel(x, y);
                        for (int c = 0; c < nc; ++c)
                        {
                                const double e = static_cast<double>(pa[c]) - pb[c];
                                sq += e * e;
                                sum_abs += std::abs(e);
                                max_abs = std::max(max_abs, std::abs(e));
                        }
                        sq_total += sq;

                        const Direction d = erp_pixel_to_direction(dims, x + 0.5, y + 0.5);
                        auto add = [&](Accum& acc) {
                                acc.sq += sq;
                                acc.count += nc;
                        };
                        add(face_acc[std::string(face_name(direction_to_face_coord(d).face))]);

                        const VpPixelSource src = direction_to_subregion_coords(d, layout);
                        int best = 0;
                        for (int k = 1; k < src.count; ++k)
                        {
                                if (src.entries[k].weight > src.entries[best].weight)
                                {
                                        best = k;
                                }
                        }
                        if (src.count > 0)
                        {
                                add(sub_acc[std::string(face_name(src.entries[best].coord.sub))]);
                        }

                        const double lat = (0.5 - (y + 0.5) / dims.height) * kPi;
                        if (lat > kPoleBandLat)
                        {
                                add(north);
                        }
                        else if (lat < -kPoleBandLat)
                        {
                                add(south);
                        }
                }
        }

        const double samples = static_cast<double>(a.data().size());
        RoundTripReport r;
        r.psnr_db = psnr_from_mse(sq_total / samples);
        r.max_abs_err = max_abs;
        r.mean_abs_err = sum_abs / samples;
        for (const auto& [k, acc] : sub_acc)
        {
                r.subregion_psnr[k] = acc.psnr();
        }
        for (const auto& [k, acc] : face_acc)
        {
                r.face_psnr[k] = acc.psnr();
        }
        r.pole_north_psnr = north.psnr();
        r.pole_south_psnr = south.psnr();
        return r;
}

std::string report_to_json(const RoundTripReport& r, const std::string& extra_fields_json)
{
        using nlohmann::json;
        auto db = [](double v) -> json {
                if (std::isinf(v))
                {
                        return "inf";
                }
                return v;
        };
        json j = json::parse(extra_fields_json);
        j["schema"] = RoundTripReport::kSchema;
        j["psnr_db"] = db(r.psnr_db);
        j["max_abs_err"] = r.max_abs_err;
        j["mean_abs_err"] = r.mean_abs_err;
        json subs = json::object();
        for (const auto& [k, v] : r.subregion_psnr)
        {
                subs[k] = db(v);
        }
        json faces = json::object();
        for (const auto& [k, v] : r.face_psnr)
        {
                faces[k] = db(v);
        }
        j["regions"] = {{"subregion_psnr_db", subs},
                        {"face_psnr_db", faces},
                        {"pole_north_psnr_db", db(r.pole_north_psnr)},
                        {"pole_south_psnr_db", db(r.pole_south_psnr)}};
        return j.dump(2);
}

OverlapStats overlap_consistency(const ViewPointImage& vp)
{
        const ViewPointLayout& layout = vp.layout();
        const int s = layout.subregion_side();
        const auto tiles = vp.tiles();
        const int nc = vp.buffer().channels();

        OverlapStats st;
        double sum = 0;
        std::array<float, 4> other{};
        for (FaceId sub : kSubregions)
        {
                const ImageBuffer& own = tiles[subregion_index(sub)];
                for (int i = 0; i < s; ++i)
                {
                        for (int j = 0; j < s; ++j)
                        {
                                const Direction d = subregion_coord_to_direction({sub, i + 0.5, j + 0.5}, layout);
                                const VpPixelSource src = direction_to_subregion_coords(d, layout);
                                if (src.count < 2)
                                {
                                        continue;
                                }
                                const auto& e = src.entries[0].coord.sub == sub ? src.entries[1] : src.entries[0];
                                if (e.coord.sub == sub)
                                {
                                        continue;
                                }
                                sample_bilinear(tiles[subregion_index(e.coord.sub)], e.coord.j, e.coord.i, false, other);
                                const auto a = own.pixel(j, i);
                                double diff = 0;
                                for (int c = 0; c < nc; ++c)
                                {
                                        diff = std::max(diff, std::abs(static_cast<double>(a[c]) - other[c]));
                                }
                                sum += diff;
                                st.max_abs = std::max(st.max_abs, diff);
                                ++st.pixels;
                        }
                }
        }
        st.mean_abs = st.pixels > 0 ? sum / static_cast<double>(st.pixels) : 0.0;
        return st;
}

double angular_distance_to_arc(const Direction& d, const GreatArc& arc)
{
        const Vec3 nrm = cross(arc.a.vec(), arc.b.vec());
        const double len = norm(nrm);
        const double to_ends = std::min(angle_between(d, arc.a), angle_between(d, arc.b));
        if (len == 0)
        {
                return to_ends;
        }
        const Vec3 axis = nrm * (1.0 / len);
        const double off = dot(d.vec(), axis);
        const Vec3 proj = d.vec() - axis * off;
        if (norm(proj) == 0)
        {
                return kPi / 2;
        }
        const bool inside = dot(cross(arc.a.vec(), proj), axis) >= 0 && dot(cross(proj, arc.b.vec()), axis) >= 0;
        if (!inside)
        {
                return to_ends;
        }
        return std::asin(std::min(1.0, std::abs(off)));
}

std::vector<GreatArc> layout_seams()
{
        std::vector<GreatArc> arcs;
        const Direction pole({0, 1, 0});
        for (double sx : {1.0, -1.0})
        {
                for (double sz : {1.0, -1.0})
                {
                        const Direction top({sx, 1, sz});
                        arcs.push_back({Direction({sx, -1, sz}), top});
                        arcs.push_back({pole, top});
                }
        }
        return arcs;
}

double seam_energy(const ErpImage& erp, const std::vector<GreatArc>& seams)
{
        const ImageBuffer& img = erp.buffer();
        const int w = img.width();
        const int h = img.height();
        const int nc = img.channels();
        const int color = nc == 4 ? 3 : nc;

        std::vector<double> lum(static_cast<std::size_t>(w) * h);
        for (int y = 0; y < h; ++y)
        {
                for (int x = 0; x < w; ++x)
                {
                        double v = 0;
                        for (int c = 0; c < color; ++c)
                        {
                                v += img.at(x, y, c);
                        }
                        lum[static_cast<std::size_t>(y) * w + x] = v / color;
                }
        }
        auto L = [&](int x, int y) { return lum[static_cast<std::size_t>(y) * w + x]; };

        const double step = kPi / h;
        double seam_sum = 0;
        double near_sum = 0;
        std::size_t seam_n = 0;
        std::size_t near_n = 0;
        for (int y = 0; y < h; ++y)
        {
                for (int x = 0; x < w; ++x)
                {
                        const Direction d = erp_pixel_to_direction(erp.dims(), x + 0.5, y + 0.5);
                        double dist = kPi;
                        for (const auto& arc : seams)
                        {
                                dist = std::min(dist, angular_distance_to_arc(d, arc));
                        }
                        const bool on_seam = dist <= step;
                        const bool matched = dist >= 3 * step && dist <= 6 * step;
                        if (!on_seam && !matched)
                        {
                                continue;
                        }
                        const double gx = (L((x + 1) % w, y) - L((x + w - 1) % w, y)) / 2;
                        const int y0 = std::max(y - 1, 0);
                        const int y1 = std::min(y + 1, h - 1);
                        const double gy = (L(x, y1) - L(x, y0)) / (y1 - y0);
                        const double g = std::hypot(gx, gy);
                        if (on_seam)
                        {
                                seam_sum += g;
                                ++seam_n;
                        }
                        else
                        {
                                near_sum += g;
                                ++near_n;
                        }
                }
        }
        if (seam_n == 0 || near_n == 0)
        {
                return 0;
        }
        return seam_sum / static_cast<double>(seam_n) - near_sum / static_cast<double>(near_n);
}

namespace
{
double legendre(int k, double y)
{
        if (k == 0)
        {
                return 1;
        }
        double p0 = 1;
        double p1 = y;
        for (int l = 2; l <= k; ++l)
        {
                const double p2 = ((2 * l - 1) * y * p1 - (l - 1) * p0) / l;
                p0 = p1;
                p1 = p2;
        }
        return p1;
}

constexpr int kNormWidth = 512;
constexpr int kNormHeight = 256;
}

BandLimitedField::BandLimitedField(std::uint64_t seed, int cutoff, int channels)
{
        if (cutoff < 1)
        {
                throw DomainError("band limit cutoff must be at least 1");
        }
        if (channels < 1 || channels > 4)
        {
                throw DomainError("channel count must be 1..4");
        }
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> amp(-1.0, 1.0);
        std::uniform_real_distribution<double> phase(0.0, 2 * kPi);
        terms_.resize(channels);
        for (auto& terms : terms_)
        {
                for (int l = 1; l <= cutoff; ++l)
                {
                        for (int m = 0; m <= l; ++m)
                        {
                                const double a = amp(rng) / l;
                                terms.push_back({l, m, std::polar(1.0, phase(rng)), a});
                        }
                }
        }

        lo_.assign(channels, std::numeric_limits<double>::infinity());
        hi_.assign(channels, -std::numeric_limits<double>::infinity());
        const ImageDims ref{kNormWidth, kNormHeight};
        for (int y = 0; y <= kNormHeight; ++y)
        {
                for (int x = 0; x < kNormWidth; ++x)
                {
                        const Direction d = erp_pixel_to_direction(ref, x, y);
                        for (int c = 0; c < channels; ++c)
                        {
                                const double v = raw(d, c);
                                lo_[c] = std::min(lo_[c], v);
                                hi_[c] = std::max(hi_[c], v);
                        }
                }
        }
}

double BandLimitedField::raw(const Direction& d, int channel) const
{
        const std::complex<double> zx(d.z(), d.x());
        double v = 0;
        std::complex<double> power(1.0, 0.0);
        int power_m = 0;
        for (const Term& t : terms_[channel])
        {
                if (t.m == 0)
                {
                        power = {1.0, 0.0};
                        power_m = 0;
                }
                while (power_m < t.m)
                {
                        power *= zx;
                        ++power_m;
                }
                v += t.amp * (power * t.phase).real() * legendre(t.l - t.m, d.y());
        }
        return v;
}

double BandLimitedField::value(const Direction& d, int channel) const
{
        const double span = hi_[channel] - lo_[channel];
        const double v = span > 0 ? 0.05 + 0.9 * (raw(d, channel) - lo_[channel]) / span : 0.5;
        return std::clamp(v, 0.0, 1.0);
}

ErpImage band_limited_sphere_image(ImageDims dims, std::uint64_t seed, int cutoff, int channels)
{
        ErpImage::check_dims(dims);
        const BandLimitedField field(seed, cutoff, channels);
        ImageBuffer img(dims.width, dims.height, channels, ColorSpace::Linear);
        parallel_rows(dims.height, 1, [&](int y) {
                for (int x = 0; x < dims.width; ++x)
                {
                        const Direction d = erp_pixel_to_direction(dims, x + 0.5, y + 0.5);
                        for (int c = 0; c < channels; ++c)
                        {
                                img.at(x, y, c) = static_cast<float>(field.value(d, c));
                        }
                }
        });
        return ErpImage(std::move(img));
}

ErpImage reference_fixture()
{
        return band_limited_sphere_image(kFixtureDims, kFixtureSeed, kFixtureCutoff);
}

}
