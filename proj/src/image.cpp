// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the derender project.

#include "derender/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace derender {

Image::Image(int w, int h, ColorState s) : width(w), height(h), state(s) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("image dimensions must be positive");
    data.assign(static_cast<std::size_t>(3) * w * h, 0.0);
}

Image resize_bilinear(const Image& src, int new_w, int new_h) {
    if (new_w <= 0 || new_h <= 0) throw std::invalid_argument("resize to empty image");
    if (new_w == src.width && new_h == src.height) return src;
    Image out(new_w, new_h, src.state);
    const double sx_scale = static_cast<double>(src.width) / new_w;
    const double sy_scale = static_cast<double>(src.height) / new_h;
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < new_h; ++y) {
            double sy = (y + 0.5) * sy_scale - 0.5;
            sy = std::clamp(sy, 0.0, static_cast<double>(src.height - 1));
            const int y0 = static_cast<int>(sy);
            const int y1 = std::min(y0 + 1, src.height - 1);
            const double fy = sy - y0;
            for (int x = 0; x < new_w; ++x) {
                double sx = (x + 0.5) * sx_scale - 0.5;
                sx = std::clamp(sx, 0.0, static_cast<double>(src.width - 1));
                const int x0 = static_cast<int>(sx);
                const int x1 = std::min(x0 + 1, src.width - 1);
                const double fx = sx - x0;
                const double top = src.at(c, x0, y0) + fx * (src.at(c, x1, y0) - src.at(c, x0, y0));
                const double bot = src.at(c, x0, y1) + fx * (src.at(c, x1, y1) - src.at(c, x0, y1));
                out.at(c, x, y) = top + fy * (bot - top);
            }
        }
    return out;
}

Image flip_horizontal(const Image& src) {
    Image out(src.width, src.height, src.state);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < src.height; ++y)
            for (int x = 0; x < src.width; ++x)
                out.at(c, x, y) = src.at(c, src.width - 1 - x, y);
    return out;
}

Image flip_vertical(const Image& src) {
    Image out(src.width, src.height, src.state);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < src.height; ++y)
            for (int x = 0; x < src.width; ++x)
                out.at(c, x, y) = src.at(c, x, src.height - 1 - y);
    return out;
}

Image crop(const Image& src, int x0, int y0, int w, int h) {
    if (x0 < 0 || y0 < 0 || w <= 0 || h <= 0 || x0 + w > src.width || y0 + h > src.height)
        throw std::invalid_argument("crop window out of bounds");
    Image out(w, h, src.state);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) out.at(c, x, y) = src.at(c, x0 + x, y0 + y);
    return out;
}

double max_abs_diff(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

}  // namespace derender
