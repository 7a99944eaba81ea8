// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the derender project.

#pragma once

#include <cstddef>
#include <vector>

#include "derender/color.hpp"

namespace derender {

/// Planar floating-point raster: channel-major, row-major within a channel,
/// values nominally in [0,1]. Always carries a ColorState tag.
struct Image {
    int width = 0;
    int height = 0;
    ColorState state = ColorState::Srgb;
    std::vector<double> data;  // size == 3 * width * height

    Image() = default;
    Image(int w, int h, ColorState s);

    std::size_t plane() const { return static_cast<std::size_t>(width) * height; }
    std::size_t size() const { return data.size(); }

    double at(int c, int x, int y) const { return data[c * plane() + static_cast<std::size_t>(y) * width + x]; }
    double& at(int c, int x, int y) { return data[c * plane() + static_cast<std::size_t>(y) * width + x]; }

    Triple pixel(int x, int y) const {
        return {at(0, x, y), at(1, x, y), at(2, x, y)};
    }
    void set_pixel(int x, int y, const Triple& t) {
        at(0, x, y) = t.c0;
        at(1, x, y) = t.c1;
        at(2, x, y) = t.c2;
    }

    bool same_shape(const Image& o) const { return width == o.width && height == o.height; }
};

/// Bilinear resample to (new_w, new_h); a same-size request returns a copy.
Image resize_bilinear(const Image& src, int new_w, int new_h);

Image flip_horizontal(const Image& src);
Image flip_vertical(const Image& src);

/// Copy the window starting at (x0, y0), w by h pixels. Throws if out of bounds.
Image crop(const Image& src, int x0, int y0, int w, int h);

double max_abs_diff(const Image& a, const Image& b);

}  // namespace derender
