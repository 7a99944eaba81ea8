// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the derender project.

#pragma once

#include <limits>
#include <string>
#include <vector>

#include "derender/image.hpp"
#include "derender/mapping.hpp"

namespace derender::metrics {

/// Aggregate PSNR cap: values are clipped to this in aggregates so that
/// infinite (zero-MSE) and quantization-limited scores compare stably.
inline constexpr double kPsnrCapDb = 100.0;

/// 10*log10(peak^2 / MSE) over all pixels and channels; +infinity when the
/// images are identical.
double psnr(const Image& image, const Image& reference, double peak = 1.0);

struct PsnrReport {
    std::vector<double> per_image;  // raw values, may contain +inf
    double avg = 0.0;
    double q1 = 0.0;
    double q2 = 0.0;
    double q3 = 0.0;
};

/// Mean plus linear-interpolation quartiles, every value capped at
/// kPsnrCapDb before aggregation. per_image keeps the raw values.
PsnrReport psnr_stats(const std::vector<double>& values);

/// Windowed SSIM, Gaussian 11x11 sigma 1.5, k1=0.01, k2=0.03, dynamic range
/// L; computed per channel over all valid window positions and averaged
/// across channels.
double ssim(const Image& image, const Image& reference, double dynamic_range = 1.0);

struct ProtocolReport {
    PsnrReport srgb_to_xyz;      // F(srgb) vs ground-truth XYZ
    PsnrReport rec_xyz_to_srgb;  // G(F(srgb)) vs srgb
    PsnrReport gt_xyz_to_srgb;   // G(ground-truth XYZ) vs srgb
    double ssim_avg = 0.0;       // SSIM of F(srgb) vs ground-truth XYZ
};

struct EvalPair {
    Image srgb;
    Image xyz;
};

ProtocolReport evaluate_protocol(const mapping::GlobalMapping& model_f,
                                 const mapping::GlobalMapping& model_g,
                                 const std::vector<EvalPair>& pairs);

/// Structured text report with the three PSNR column groups and the SSIM
/// line. Deterministic formatting.
std::string format_report(const ProtocolReport& report, std::string_view method_name);

}  // namespace derender::metrics
