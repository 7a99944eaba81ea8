// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the derender project.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "derender/color.hpp"
#include "derender/image.hpp"

namespace derender::mapping {

enum class Direction : std::uint8_t { ForwardF, InverseG };

const char* to_string(Direction d);

/// Monotone piecewise-linear curve on [0,1] with fixed knot abscissae and
/// trainable ordinates. Ordinate increments are the softmax of the logits,
/// which pins y(0)=0, y(1)=1 and keeps the curve strictly increasing for
/// any finite logits.
struct ToneCurve {
    std::vector<double> grid;    // K+1 abscissae, structural (not trained)
    std::vector<double> logits;  // K trainable values

    int segments() const { return static_cast<int>(logits.size()); }
};

/// Abscissa layout per direction. Forward (de-render) curves act on encoded
/// values and use a uniform grid; inverse (render) curves act on linear
/// values and use a shadow-dense power grid, so that the baseline encode
/// curve is the exact piecewise-linear inverse of the baseline decode curve
/// at any K.
std::vector<double> curve_grid(Direction d, int knots);

/// Softmax increments and cumulative ordinates derived from the logits;
/// computed once per model use.
struct CurveCache {
    std::vector<double> delta;  // K increments, sum to 1
    std::vector<double> y;      // K+1 ordinates, y[0]=0, y[K]=1
};

CurveCache make_curve_cache(const ToneCurve& curve);

struct CurvePoint {
    double value = 0.0;
    int segment = 0;   // segment index in [0, K)
    double t = 0.0;    // position within segment, [0,1]
    double slope = 0.0;
};

/// Evaluate at v in [0,1]. At interior knots the left segment is chosen, so
/// the reported slope is the left-segment subgradient.
CurvePoint curve_eval(const ToneCurve& curve, const CurveCache& cache, double v);

/// Accumulate cot * dT/dlogits into grad (length K) for the evaluation
/// point described by `at`.
void curve_vjp_logits(const CurveCache& cache, const CurvePoint& at, double cot,
                      std::span<double> grad);

/// 3x9 coefficients over the degree-2 monomial basis
/// phi(c) = [c0, c1, c2, c0^2, c1^2, c2^2, c0*c1, c0*c2, c1*c2].
struct PolyMatrix {
    std::array<std::array<double, 9>, 3> coeff{};
};

std::array<double, 9> poly_basis(const Triple& c);

/// The learnable global color transform. ForwardF maps sRGB to XYZ as
/// matrix(basis(curve(c))); InverseG maps XYZ to sRGB as
/// curve(matrix(basis(c))), with per-channel curves after the matrix.
///
/// param_vector order: curves[0].logits, curves[1].logits, curves[2].logits,
/// then matrix coefficients row-major; length 3K + 27.
struct GlobalMapping {
    Direction direction = Direction::ForwardF;
    int knots = 16;
    std::array<ToneCurve, 3> curves;
    PolyMatrix matrix;

    std::size_t param_count() const { return static_cast<std::size_t>(3) * knots + 27; }
    std::vector<double> param_vector() const;
    void set_param_vector(std::span<const double> params);

    ColorState input_state() const {
        return direction == Direction::ForwardF ? ColorState::Srgb : ColorState::Xyz;
    }
    ColorState output_state() const {
        return direction == Direction::ForwardF ? ColorState::Xyz : ColorState::Srgb;
    }
};

/// Fresh mapping acting as the standard baseline: gamma-2.2 decode plus the
/// published sRGB->XYZ matrix for ForwardF, and the exact inverse chain for
/// InverseG. Degree-2 coefficients start at zero.
GlobalMapping init_baseline(Direction direction, int knots = 16);

/// The mathematical per-pixel action, optionally without the output clamp
/// (ForwardF XYZ outputs may exceed 1 near white).
Triple map_pixel(const GlobalMapping& model, const Triple& in, bool clamp_output = true);

/// Raster apply: per pixel independently, output clamped into [0,1] with
/// clamp counts reported. Input state must match the model direction.
Image apply(const GlobalMapping& model, const Image& in, ClampStats* stats = nullptr);

/// Reverse-mode derivative of apply. Accumulates dL/dparams into param_grad
/// (size param_count) given dL/doutput; optionally produces dL/dinput.
/// Clamped samples contribute zero gradient; at curve knots the left
/// segment's slope is used.
void apply_vjp(const GlobalMapping& model, const Image& in, const Image& output_cotangent,
               std::span<double> param_grad, Image* input_cotangent = nullptr);

// -- serialization -----------------------------------------------------------
// Versioned little-endian binary record; layout documented in the README.
// Round-trips param_vector bit-exactly.

std::vector<std::uint8_t> serialize_model(const GlobalMapping& model, std::string_view tag = "");
GlobalMapping deserialize_model(std::span<const std::uint8_t> bytes, std::string* tag = nullptr);

}  // namespace derender::mapping
