#pragma once

#include <vpk/erp.hpp>
#include <vpk/image.hpp>
#include <vpk/viewpoint.hpp>

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace vpk
{
/// Peak-1 PSNR in dB; +infinity when the images are identical. Throws ShapeMismatch.
double psnr(const ImageBuffer& a, const ImageBuffer& b);

/// PSNR over the pixels where `include(x, y)` holds; +infinity if none differ (or none selected).
double psnr_masked(const ImageBuffer& a, const ImageBuffer& b, const std::function<bool(int, int)>& include);

struct RoundTripReport
{
        static constexpr int kSchema = 1;

        double psnr_db = 0;
        double max_abs_err = 0;
        double mean_abs_err = 0;
        std::map<std::string, double> subregion_psnr;
        std::map<std::string, double> face_psnr;
        double pole_north_psnr = 0;
        double pole_south_psnr = 0;
};

/// Latitude above which an ERP pixel counts as a pole band, radians.
inline constexpr double kPoleBandLat = 75.0 * kPi / 180.0;

/// Compares two ERPs of equal shape; subregion membership uses the layout's heaviest source.
RoundTripReport roundtrip_report(const ErpImage& original, const ErpImage& restored, const ViewPointLayout& layout);

/// JSON object with stable field names; infinite PSNR values are written as the string "inf".
std::string report_to_json(const RoundTripReport& r, const std::string& extra_fields_json = "{}");

struct OverlapStats
{
        double mean_abs = 0;
        double max_abs = 0;
        std::size_t pixels = 0;
};

/// Disagreement between the two copies of each overlap pixel (rhombi and U petals).
OverlapStats overlap_consistency(const ViewPointImage& vp);

struct GreatArc
{
        Direction a;
        Direction b;
};

/// Shortest angular distance from d to a great-circle arc shorter than pi.
double angular_distance_to_arc(const Direction& d, const GreatArc& arc);

/// Arcs where the heaviest subregion changes: the four vertical cube edges and the four U-face
/// half-diagonals from the face centre to its corners.
std::vector<GreatArc> layout_seams();

/// Mean gradient magnitude on pixels within one pixel of a seam minus the mean over pixels
/// 3 to 6 pixels away from every seam.
double seam_energy(const ErpImage& erp, const std::vector<GreatArc>& seams);

/// Smooth synthetic sphere: per channel a seeded sum of degree <= cutoff polynomial harmonics
/// Re((z + ix)^m e^{i phi}) P_{l-m}(y), rescaled into [0.05, 0.95].
class BandLimitedField
{
public:
        BandLimitedField(std::uint64_t seed, int cutoff, int channels = 3);

        int channels() const { return static_cast<int>(terms_.size()); }
        double value(const Direction& d, int channel) const;

private:
        struct Term
        {
                int l;
                int m;
                std::complex<double> phase;
                double amp;
        };

        double raw(const Direction& d, int channel) const;

        std::vector<std::vector<Term>> terms_;
        std::vector<double> lo_;
        std::vector<double> hi_;
};

/// ERP sampling of BandLimitedField at pixel centres. Throws DomainError if cutoff < 1.
ErpImage band_limited_sphere_image(ImageDims dims, std::uint64_t seed, int cutoff, int channels = 3);

inline constexpr std::uint64_t kFixtureSeed = 7;
inline constexpr int kFixtureCutoff = 8;
inline constexpr ImageDims kFixtureDims{1024, 512};

/// The standard 1024 x 512 three-channel test sphere.
ErpImage reference_fixture();

}
