// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the derender project.

#include "derender/color.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "derender/image.hpp"

namespace derender {

const char* to_string(ColorState s) {
    switch (s) {
        case ColorState::Srgb: return "srgb";
        case ColorState::LinearRgb: return "linear-rgb";
        case ColorState::Xyz: return "xyz";
        case ColorState::Lab: return "lab";
    }
    return "?";
}

const WhitePoint* white_point_by_name(std::string_view name) {
    if (name == "D65") return &kD65;
    if (name == "D50") return &kD50;
    if (name == "E") return &kIllumE;
    return nullptr;
}

const char* white_point_name(const WhitePoint& w) {
    if (w.Xn == kD65.Xn && w.Zn == kD65.Zn) return "D65";
    if (w.Xn == kD50.Xn && w.Zn == kD50.Zn) return "D50";
    if (w.Xn == kIllumE.Xn && w.Zn == kIllumE.Zn) return "E";
    return "custom";
}

// IEC 61966-2-1:1999 (sRGB), BT.709 primaries, D65 white.
const Mat3 kSrgbToXyz = {{
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
}};

Mat3 inverse3(const Mat3& m) {
    const double a = m[0][0], b = m[0][1], c = m[0][2];
    const double d = m[1][0], e = m[1][1], f = m[1][2];
    const double g = m[2][0], h = m[2][1], i = m[2][2];
    const double det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
    if (std::abs(det) < 1e-14) throw std::domain_error("matrix not invertible");
    const double inv = 1.0 / det;
    return {{
        {(e * i - f * h) * inv, (c * h - b * i) * inv, (b * f - c * e) * inv},
        {(f * g - d * i) * inv, (a * i - c * g) * inv, (c * d - a * f) * inv},
        {(d * h - e * g) * inv, (b * g - a * h) * inv, (a * e - b * d) * inv},
    }};
}

Mat3 matmul(const Mat3& a, const Mat3& b) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
    return r;
}

Triple apply_mat3(const Mat3& m, const Triple& v) {
    return {
        m[0][0] * v.c0 + m[0][1] * v.c1 + m[0][2] * v.c2,
        m[1][0] * v.c0 + m[1][1] * v.c1 + m[1][2] * v.c2,
        m[2][0] * v.c0 + m[2][1] * v.c1 + m[2][2] * v.c2,
    };
}

const Mat3& xyz_to_srgb_matrix() {
    static const Mat3 inv = [] {
        Mat3 m = inverse3(kSrgbToXyz);
        const Mat3 prod = matmul(kSrgbToXyz, m);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double want = i == j ? 1.0 : 0.0;
                if (std::abs(prod[i][j] - want) > 1e-9)
                    throw std::runtime_error("sRGB matrix inverse failed verification");
            }
        return m;
    }();
    return inv;
}

double gamma_decode(double v, double gamma) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("gamma_decode: input outside [0,1]");
    if (!(gamma > 0.0)) throw std::domain_error("gamma_decode: gamma must be positive");
    return std::pow(v, gamma);
}

double gamma_encode(double v, double gamma) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("gamma_encode: input outside [0,1]");
    if (!(gamma > 0.0)) throw std::domain_error("gamma_encode: gamma must be positive");
    return std::pow(v, 1.0 / gamma);
}

Triple linear_rgb_to_xyz(const Triple& rgb, const Mat3& m) { return apply_mat3(m, rgb); }

Triple xyz_to_linear_rgb(const Triple& xyz) { return apply_mat3(xyz_to_srgb_matrix(), xyz); }

namespace {

constexpr double kLabDelta = 6.0 / 29.0;
constexpr double kLabDelta3 = kLabDelta * kLabDelta * kLabDelta;

double lab_f(double t) {
    if (t > kLabDelta3) return std::cbrt(t);
    return t / (3.0 * kLabDelta * kLabDelta) + 4.0 / 29.0;
}

double lab_f_inv(double t) {
    if (t > kLabDelta) return t * t * t;
    return 3.0 * kLabDelta * kLabDelta * (t - 4.0 / 29.0);
}

// d lab_f / dt; continuous at the branch point by construction of the
// CIE function, so LAB conversion is C1 on its domain.
double lab_f_prime(double t) {
    if (t > kLabDelta3) {
        const double c = std::cbrt(t);
        return 1.0 / (3.0 * c * c);
    }
    return 1.0 / (3.0 * kLabDelta * kLabDelta);
}

}  // namespace

Triple xyz_to_lab(const Triple& xyz, const WhitePoint& white) {
    if (xyz.c0 < 0.0 || xyz.c1 < 0.0 || xyz.c2 < 0.0)
        throw std::domain_error("xyz_to_lab: negative tristimulus value");
    const double fx = lab_f(xyz.c0 / white.Xn);
    const double fy = lab_f(xyz.c1 / white.Yn);
    const double fz = lab_f(xyz.c2 / white.Zn);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

Triple lab_to_xyz(const Triple& lab, const WhitePoint& white) {
    if (lab.c0 < 0.0 || lab.c0 > 100.0)
        throw std::domain_error("lab_to_xyz: L outside [0,100]");
    const double fy = (lab.c0 + 16.0) / 116.0;
    const double fx = fy + lab.c1 / 500.0;
    const double fz = fy - lab.c2 / 200.0;
    return {white.Xn * lab_f_inv(fx), white.Yn * lab_f_inv(fy), white.Zn * lab_f_inv(fz)};
}

Mat3 xyz_to_lab_jacobian(const Triple& xyz, const WhitePoint& white) {
    const double dfx = lab_f_prime(xyz.c0 / white.Xn) / white.Xn;
    const double dfy = lab_f_prime(xyz.c1 / white.Yn) / white.Yn;
    const double dfz = lab_f_prime(xyz.c2 / white.Zn) / white.Zn;
    return {{
        {0.0, 116.0 * dfy, 0.0},
        {500.0 * dfx, -500.0 * dfy, 0.0},
        {0.0, 200.0 * dfy, -200.0 * dfz},
    }};
}

double delta_e(const Triple& lab1, const Triple& lab2, DeltaEVariant variant) {
    const double dl = lab1.c0 - lab2.c0;
    const double da = lab1.c1 - lab2.c1;
    const double db = lab1.c2 - lab2.c2;
    if (variant == DeltaEVariant::PaperL1)
        return std::abs(dl) + std::abs(da) + std::abs(db);
    return std::sqrt(dl * dl + da * da + db * db);
}

double clamp01_counted(double v, ClampStats& stats) {
    if (v < 0.0) {
        ++stats.low;
        return 0.0;
    }
    if (v > 1.0) {
        ++stats.high;
        return 1.0;
    }
    return v;
}

Image srgb_to_xyz_baseline(const Image& srgb, double gamma, const Mat3& m, ClampStats* stats) {
    if (srgb.state != ColorState::Srgb)
        throw std::invalid_argument("srgb_to_xyz_baseline: input must be sRGB-state");
    ClampStats local;
    Image out(srgb.width, srgb.height, ColorState::Xyz);
    for (int y = 0; y < srgb.height; ++y)
        for (int x = 0; x < srgb.width; ++x) {
            Triple p = srgb.pixel(x, y);
            p.c0 = gamma_decode(clamp01_counted(p.c0, local), gamma);
            p.c1 = gamma_decode(clamp01_counted(p.c1, local), gamma);
            p.c2 = gamma_decode(clamp01_counted(p.c2, local), gamma);
            out.set_pixel(x, y, apply_mat3(m, p));
        }
    if (stats) stats->merge(local);
    return out;
}

Image xyz_to_srgb_baseline(const Image& xyz, double gamma, ClampStats* stats) {
    if (xyz.state != ColorState::Xyz)
        throw std::invalid_argument("xyz_to_srgb_baseline: input must be XYZ-state");
    ClampStats local;
    Image out(xyz.width, xyz.height, ColorState::Srgb);
    const Mat3& inv = xyz_to_srgb_matrix();
    for (int y = 0; y < xyz.height; ++y)
        for (int x = 0; x < xyz.width; ++x) {
            Triple lin = apply_mat3(inv, xyz.pixel(x, y));
            lin.c0 = gamma_encode(clamp01_counted(lin.c0, local), gamma);
            lin.c1 = gamma_encode(clamp01_counted(lin.c1, local), gamma);
            lin.c2 = gamma_encode(clamp01_counted(lin.c2, local), gamma);
            out.set_pixel(x, y, lin);
        }
    if (stats) stats->merge(local);
    return out;
}

}  // namespace derender
