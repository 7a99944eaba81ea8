// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the derender project.

#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace derender {

struct Image;

/// Color state tag carried by every raster and triple at module boundaries.
enum class ColorState : std::uint8_t { Srgb, LinearRgb, Xyz, Lab };

const char* to_string(ColorState s);

/// One color value; the interpretation of c0/c1/c2 is fixed by an
/// accompanying ColorState.
struct Triple {
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;

    double operator[](int i) const { return i == 0 ? c0 : (i == 1 ? c1 : c2); }
    double& operator[](int i) { return i == 0 ? c0 : (i == 1 ? c1 : c2); }
    bool operator==(const Triple&) const = default;
};

/// Reference white tristimulus values, Yn normalized to 1.
struct WhitePoint {
    double Xn;
    double Yn;
    double Zn;
};

// CIE standard illuminants, 2-degree observer, Y normalized to 1
// (ASTM E308-01 table 5.3).
inline constexpr WhitePoint kD65{0.95047, 1.0, 1.08883};
inline constexpr WhitePoint kD50{0.96422, 1.0, 0.82521};
inline constexpr WhitePoint kIllumE{1.0, 1.0, 1.0};

/// Lookup by the names used in chart reference files ("D65", "D50", "E").
/// Returns nullptr for unknown names.
const WhitePoint* white_point_by_name(std::string_view name);
const char* white_point_name(const WhitePoint& w);

using Mat3 = std::array<std::array<double, 3>, 3>;

// Linear BT.709/sRGB primaries to CIE-XYZ under D65 (IEC 61966-2-1:1999).
// Row sums reproduce the D65 white point.
extern const Mat3 kSrgbToXyz;

/// Numerical inverse of kSrgbToXyz; computed on first use and verified
/// against the identity to 1e-9.
const Mat3& xyz_to_srgb_matrix();

Mat3 inverse3(const Mat3& m);
Mat3 matmul(const Mat3& a, const Mat3& b);
Triple apply_mat3(const Mat3& m, const Triple& v);

enum class DeltaEVariant : std::uint8_t { Cie76Euclidean, PaperL1 };

// -- scalar transfer functions --------------------------------------------
// Pure power-law tone response. Out-of-range input raises std::domain_error;
// clamping happens only in the raster-level wrappers below.

double gamma_decode(double v, double gamma = 2.2);
double gamma_encode(double v, double gamma = 2.2);

// -- per-pixel conversions -------------------------------------------------

Triple linear_rgb_to_xyz(const Triple& rgb, const Mat3& m = kSrgbToXyz);
Triple xyz_to_linear_rgb(const Triple& xyz);
Triple xyz_to_lab(const Triple& xyz, const WhitePoint& white = kD65);
Triple lab_to_xyz(const Triple& lab, const WhitePoint& white = kD65);

/// CIE76 is the Euclidean distance in LAB; PaperL1 sums per-channel
/// absolute differences. Both are metrics on LAB.
double delta_e(const Triple& lab1, const Triple& lab2, DeltaEVariant variant);

// Jacobian of xyz_to_lab at xyz, laid out d out[r] / d in[c].
Mat3 xyz_to_lab_jacobian(const Triple& xyz, const WhitePoint& white = kD65);

// -- raster-level wrappers ---------------------------------------------------
// These clamp into [0,1] before scalar ops and count how often they did.

struct ClampStats {
    std::uint64_t low = 0;
    std::uint64_t high = 0;
    std::uint64_t total() const { return low + high; }
    void merge(const ClampStats& o) { low += o.low; high += o.high; }
};

double clamp01_counted(double v, ClampStats& stats);

/// Gamma-decode then matrix: the "standard" de-render baseline.
Image srgb_to_xyz_baseline(const Image& srgb, double gamma = 2.2,
                           const Mat3& m = kSrgbToXyz,
                           ClampStats* stats = nullptr);

/// Inverse matrix then gamma-encode: the standard render baseline.
Image xyz_to_srgb_baseline(const Image& xyz, double gamma = 2.2,
                           ClampStats* stats = nullptr);

}  // namespace derender
