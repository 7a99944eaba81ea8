// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the derender project.

#include "derender/chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "derender/stats.hpp"

namespace derender::chart {

namespace {

[[noreturn]] void parse_fail(int line_no, const std::string& what) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": " + what);
}

// Strip comments and trailing whitespace; returns false for blank lines.
bool significant_line(std::string& line) {
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
        line.pop_back();
    return !line.empty();
}

bool segments_intersect(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    auto cross = [](const Point2& o, const Point2& p, const Point2& q) {
        return (p.x - o.x) * (q.y - o.y) - (p.y - o.y) * (q.x - o.x);
    };
    const double d1 = cross(c, d, a);
    const double d2 = cross(c, d, b);
    const double d3 = cross(a, b, c);
    const double d4 = cross(a, b, d);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

void validate_quad(const Quad& q, int line_no) {
    if (std::abs(quad_area(q)) <= 0.0) parse_fail(line_no, "degenerate quad (zero area)");
    // A simple quad has no crossing between its two pairs of opposite edges.
    if (segments_intersect(q[0], q[1], q[2], q[3]) || segments_intersect(q[1], q[2], q[3], q[0]))
        parse_fail(line_no, "self-intersecting quad");
}

}  // namespace

double quad_area(const Quad& q) {
    double a = 0.0;
    for (int i = 0; i < 4; ++i) {
        const Point2& p = q[i];
        const Point2& n = q[(i + 1) % 4];
        a += p.x * n.y - n.x * p.y;
    }
    return 0.5 * a;
}

ChartAnnotation parse_annotation(std::string_view text, std::string_view image_id) {
    ChartAnnotation ann;
    ann.image_id = std::string(image_id);
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    std::vector<int> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (!significant_line(line)) continue;
        std::istringstream ls(line);
        Patch p;
        if (!(ls >> p.index)) parse_fail(line_no, "expected patch index");
        if (p.index < 0) parse_fail(line_no, "negative patch index");
        for (auto& corner : p.quad)
            if (!(ls >> corner.x >> corner.y)) parse_fail(line_no, "expected 8 coordinates");
        std::string trailing;
        if (ls >> trailing) parse_fail(line_no, "unexpected trailing token '" + trailing + "'");
        if (std::find(seen.begin(), seen.end(), p.index) != seen.end())
            parse_fail(line_no, "duplicate patch index " + std::to_string(p.index));
        validate_quad(p.quad, line_no);
        seen.push_back(p.index);
        ann.patches.push_back(p);
    }
    if (ann.patches.empty()) throw std::runtime_error("no patches");
    std::vector<int> sorted = seen;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
        if (sorted[i] != static_cast<int>(i))
            throw std::runtime_error("patch indices not contiguous from 0");
    return ann;
}

std::string format_annotation(const ChartAnnotation& ann) {
    std::string out;
    char buf[256];
    for (const Patch& p : ann.patches) {
        std::snprintf(buf, sizeof buf, "%d %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n",
                      p.index, p.quad[0].x, p.quad[0].y, p.quad[1].x, p.quad[1].y, p.quad[2].x,
                      p.quad[2].y, p.quad[3].x, p.quad[3].y);
        out += buf;
    }
    return out;
}

ChartReference parse_reference(std::string_view text, std::string_view name) {
    ChartReference ref;
    ref.name = std::string(name);
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    bool have_illuminant = false;
    std::vector<std::pair<int, Triple>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (!significant_line(line)) continue;
        std::istringstream ls(line);
        if (!have_illuminant) {
            std::string key, value;
            if (!(ls >> key >> value) || key != "illuminant")
                parse_fail(line_no, "expected 'illuminant <name>' header");
            const WhitePoint* w = white_point_by_name(value);
            if (!w) parse_fail(line_no, "unknown illuminant '" + value + "'");
            ref.illuminant = *w;
            have_illuminant = true;
            continue;
        }
        int idx;
        Triple lab;
        if (!(ls >> idx >> lab.c0 >> lab.c1 >> lab.c2))
            parse_fail(line_no, "expected '<patch_index> <L> <a> <b>'");
        if (lab.c0 < 0.0 || lab.c0 > 100.0) parse_fail(line_no, "L outside [0,100]");
        if (!std::isfinite(lab.c1) || !std::isfinite(lab.c2))
            parse_fail(line_no, "non-finite a/b");
        for (const auto& r : rows)
            if (r.first == idx) parse_fail(line_no, "duplicate patch index " + std::to_string(idx));
        rows.emplace_back(idx, lab);
    }
    if (!have_illuminant) throw std::runtime_error("missing illuminant header");
    if (rows.empty()) throw std::runtime_error("no patches");
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].first != static_cast<int>(i))
            throw std::runtime_error("patch indices not contiguous from 0");
        ref.patches.push_back(rows[i].second);
    }
    return ref;
}

std::string format_reference(const ChartReference& ref) {
    std::string out = "illuminant ";
    out += white_point_name(ref.illuminant);
    out += '\n';
    char buf[160];
    for (std::size_t i = 0; i < ref.patches.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu %.17g %.17g %.17g\n", i, ref.patches[i].c0,
                      ref.patches[i].c1, ref.patches[i].c2);
        out += buf;
    }
    return out;
}

namespace {

// Even-odd crossing test with strict comparisons. Centers on a min edge
// count as inside, centers on a max edge as outside, which keeps adjacent
// masks disjoint and matches the half-open pixel convention.
bool point_in_polygon(double px, double py, const Quad& q) {
    bool inside = false;
    for (int i = 0; i < 4; ++i) {
        const Point2& a = q[i];
        const Point2& b = q[(i + 1) % 4];
        if ((a.y > py) != (b.y > py)) {
            const double t = (py - a.y) / (b.y - a.y);
            const double x_cross = a.x + t * (b.x - a.x);
            if (px < x_cross) inside = !inside;
        }
    }
    return inside;
}

}  // namespace

PatchMask rasterize_patch_mask(const Quad& quad, double shrink_factor, int image_w, int image_h) {
    if (!(shrink_factor > 0.0 && shrink_factor <= 1.0))
        throw std::invalid_argument("shrink_factor outside (0,1]");
    if (std::abs(quad_area(quad)) <= 0.0) throw std::invalid_argument("degenerate quad (zero area)");
    Point2 centroid{};
    for (const Point2& p : quad) {
        centroid.x += 0.25 * p.x;
        centroid.y += 0.25 * p.y;
    }
    Quad shrunk;
    for (int i = 0; i < 4; ++i) {
        shrunk[i].x = centroid.x + shrink_factor * (quad[i].x - centroid.x);
        shrunk[i].y = centroid.y + shrink_factor * (quad[i].y - centroid.y);
    }
    double min_x = shrunk[0].x, max_x = shrunk[0].x, min_y = shrunk[0].y, max_y = shrunk[0].y;
    for (const Point2& p : shrunk) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const int x_lo = std::max(0, static_cast<int>(std::floor(min_x - 0.5)));
    const int x_hi = std::min(image_w - 1, static_cast<int>(std::ceil(max_x)));
    const int y_lo = std::max(0, static_cast<int>(std::floor(min_y - 0.5)));
    const int y_hi = std::min(image_h - 1, static_cast<int>(std::ceil(max_y)));
    PatchMask mask;
    for (int y = y_lo; y <= y_hi; ++y)
        for (int x = x_lo; x <= x_hi; ++x)
            if (point_in_polygon(x + 0.5, y + 0.5, shrunk)) mask.push_back({x, y});
    if (mask.empty()) throw std::runtime_error("patch too small: empty mask");
    return mask;
}

Triple extract_patch_color(const Image& xyz, const PatchMask& mask) {
    return extract_patch_color_traced(xyz, mask).value;
}

PatchColorTrace extract_patch_color_traced(const Image& xyz, const PatchMask& mask) {
    if (mask.empty()) throw std::invalid_argument("empty mask");
    for (const PixelCoord& p : mask)
        if (p.x < 0 || p.y < 0 || p.x >= xyz.width || p.y >= xyz.height)
            throw std::invalid_argument("mask coordinate out of image bounds");
    PatchColorTrace trace;
    const std::size_t n = mask.size();
    // Sort (value, mask position) pairs so ties break deterministically
    // regardless of how the caller ordered equal values.
    std::vector<std::pair<double, std::size_t>> channel(n);
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < n; ++i)
            channel[i] = {xyz.at(c, mask[i].x, mask[i].y), i};
        std::sort(channel.begin(), channel.end());
        const double idx = 0.75 * static_cast<double>(n - 1);
        const std::size_t lo = static_cast<std::size_t>(idx);
        const std::size_t hi = std::min(lo + 1, n - 1);
        const double frac = idx - static_cast<double>(lo);
        trace.value[c] = channel[lo].first + frac * (channel[hi].first - channel[lo].first);
        trace.rank_lo[c] = channel[lo].second;
        trace.rank_hi[c] = channel[hi].second;
        trace.frac[c] = frac;
    }
    return trace;
}

ChartScore chart_delta_e(const Image& xyz, const ChartAnnotation& annotation,
                         const ChartReference& reference, DeltaEVariant variant,
                         const WhitePoint& white, double shrink_factor) {
    if (xyz.state != ColorState::Xyz)
        throw std::invalid_argument("chart_delta_e: image must be XYZ-state");
    if (annotation.patches.size() != reference.patches.size())
        throw std::invalid_argument("annotation and reference patch counts differ");
    ChartScore score;
    score.per_patch.assign(annotation.patches.size(), 0.0);
    double sum = 0.0;
    for (const Patch& p : annotation.patches) {
        try {
            const PatchMask mask = rasterize_patch_mask(p.quad, shrink_factor, xyz.width, xyz.height);
            const Triple c_sq = extract_patch_color(xyz, mask);
            const Triple c_rpc = xyz_to_lab(c_sq, white);
            const double de = delta_e(c_rpc, reference.patches[p.index], variant);
            score.per_patch[p.index] = de;
            sum += de;
        } catch (const std::exception& e) {
            throw std::runtime_error("patch " + std::to_string(p.index) + ": " + e.what());
        }
    }
    score.mean = sum / static_cast<double>(score.per_patch.size());
    return score;
}

}  // namespace derender::chart
