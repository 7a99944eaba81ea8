// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the derender project.

#pragma once

#include <array>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "derender/color.hpp"
#include "derender/image.hpp"

namespace derender::chart {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

using Quad = std::array<Point2, 4>;

struct Patch {
    int index = 0;
    Quad quad{};
};

/// Per-patch quadrilaterals in image pixel coordinates, origin top-left.
struct ChartAnnotation {
    std::string image_id;
    std::vector<Patch> patches;
};

/// Ground-truth LAB colors for a chart, one per patch index.
struct ChartReference {
    std::string name;
    WhitePoint illuminant = kD65;
    std::vector<Triple> patches;  // LAB
};

/// Pixel coordinates belonging to one patch mask, row-major scan order.
struct PixelCoord {
    int x = 0;
    int y = 0;
};
using PatchMask = std::vector<PixelCoord>;

double quad_area(const Quad& q);

/// Annotation grammar, one patch per line:
///   <patch_index> <x1> <y1> <x2> <y2> <x3> <y3> <x4> <y4>
/// '#' starts a comment. Indices must be unique and contiguous from 0.
ChartAnnotation parse_annotation(std::string_view text, std::string_view image_id = "");

std::string format_annotation(const ChartAnnotation& ann);

/// Hook for adapting third-party coordinate formats: an importer converts a
/// foreign document into the native annotation structure. Only the native
/// format ships here.
using AnnotationImporter = std::function<ChartAnnotation(std::string_view)>;

/// Reference grammar: header line `illuminant <name>`, then one line per
/// patch: `<patch_index> <L> <a> <b>`.
ChartReference parse_reference(std::string_view text, std::string_view name = "");

std::string format_reference(const ChartReference& ref);

/// Pixel centers (x+0.5, y+0.5) covered by the quad after scaling each
/// corner toward the centroid by shrink_factor. Membership uses the even-odd
/// crossing rule with strict comparisons, so min-edge boundary centers are
/// included and max-edge ones excluded; the result is deterministic and
/// winding-independent. Throws if the mask comes out empty.
PatchMask rasterize_patch_mask(const Quad& quad, double shrink_factor, int image_w, int image_h);

/// Per channel independently, the linear-interpolation 75th percentile of
/// the masked values. Invariant to pixel ordering within the mask.
Triple extract_patch_color(const Image& xyz, const PatchMask& mask);

/// Like extract_patch_color but also reports, per channel, which mask
/// positions hold the two bracketing order statistics and the blend weight;
/// this is what the SSL loss differentiates through.
struct PatchColorTrace {
    Triple value;
    std::array<std::size_t, 3> rank_lo{};  // positions within the mask
    std::array<std::size_t, 3> rank_hi{};
    std::array<double, 3> frac{};  // weight on rank_hi
};
PatchColorTrace extract_patch_color_traced(const Image& xyz, const PatchMask& mask);

struct ChartScore {
    std::vector<double> per_patch;  // delta E per patch index
    double mean = 0.0;
};

/// Score a reconstructed XYZ image against chart ground truth:
/// extract C_sq per patch, convert to LAB, delta E against the reference,
/// and average over patches.
ChartScore chart_delta_e(const Image& xyz, const ChartAnnotation& annotation,
                         const ChartReference& reference, DeltaEVariant variant,
                         const WhitePoint& white, double shrink_factor = 0.5);

}  // namespace derender::chart
