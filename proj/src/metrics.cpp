// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the derender project.

#include "derender/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "derender/stats.hpp"

namespace derender::metrics {

double psnr(const Image& image, const Image& reference, double peak) {
    if (!image.same_shape(reference)) throw std::invalid_argument("psnr: dimension mismatch");
    if (image.state != reference.state) throw std::invalid_argument("psnr: color state mismatch");
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < image.data.size(); ++i) {
        const double d = image.data[i] - reference.data[i];
        sum_sq += d * d;
    }
    const double mse = sum_sq / static_cast<double>(image.data.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

PsnrReport psnr_stats(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("psnr_stats: empty list");
    PsnrReport r;
    r.per_image = values;
    std::vector<double> capped(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) capped[i] = std::min(values[i], kPsnrCapDb);
    r.avg = mean(capped);
    std::sort(capped.begin(), capped.end());
    r.q1 = percentile_sorted(capped, 0.25);
    r.q2 = percentile_sorted(capped, 0.50);
    r.q3 = percentile_sorted(capped, 0.75);
    return r;
}

namespace {

std::vector<double> gaussian_kernel(int size, double sigma) {
    std::vector<double> k(size);
    const double c = (size - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        k[i] = std::exp(-(i - c) * (i - c) / (2.0 * sigma * sigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

// Separable valid-mode Gaussian filter of one channel plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int w, int h,
                                 const std::vector<double>& kernel) {
    const int ks = static_cast<int>(kernel.size());
    const int out_w = w - ks + 1;
    const int out_h = h - ks + 1;
    std::vector<double> rows(static_cast<std::size_t>(out_w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < out_w; ++x) {
            double acc = 0.0;
            for (int i = 0; i < ks; ++i) acc += kernel[i] * plane[static_cast<std::size_t>(y) * w + x + i];
            rows[static_cast<std::size_t>(y) * out_w + x] = acc;
        }
    std::vector<double> out(static_cast<std::size_t>(out_w) * out_h);
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x) {
            double acc = 0.0;
            for (int i = 0; i < ks; ++i) acc += kernel[i] * rows[static_cast<std::size_t>(y + i) * out_w + x];
            out[static_cast<std::size_t>(y) * out_w + x] = acc;
        }
    return out;
}

}  // namespace

double ssim(const Image& image, const Image& reference, double dynamic_range) {
    if (!image.same_shape(reference)) throw std::invalid_argument("ssim: dimension mismatch");
    constexpr int kWindow = 11;
    if (image.width < kWindow || image.height < kWindow)
        throw std::invalid_argument("ssim: image smaller than the 11x11 window");
    const std::vector<double> kernel = gaussian_kernel(kWindow, 1.5);
    const double c1 = std::pow(0.01 * dynamic_range, 2.0);
    const double c2 = std::pow(0.03 * dynamic_range, 2.0);
    const std::size_t plane = image.plane();
    double channel_sum = 0.0;
    std::vector<double> x(plane), y(plane), xx(plane), yy(plane), xy(plane);
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < plane; ++i) {
            x[i] = image.data[c * plane + i];
            y[i] = reference.data[c * plane + i];
            xx[i] = x[i] * x[i];
            yy[i] = y[i] * y[i];
            xy[i] = x[i] * y[i];
        }
        const auto mu_x = filter_valid(x, image.width, image.height, kernel);
        const auto mu_y = filter_valid(y, image.width, image.height, kernel);
        const auto m_xx = filter_valid(xx, image.width, image.height, kernel);
        const auto m_yy = filter_valid(yy, image.width, image.height, kernel);
        const auto m_xy = filter_valid(xy, image.width, image.height, kernel);
        double acc = 0.0;
        for (std::size_t i = 0; i < mu_x.size(); ++i) {
            const double var_x = m_xx[i] - mu_x[i] * mu_x[i];
            const double var_y = m_yy[i] - mu_y[i] * mu_y[i];
            const double cov = m_xy[i] - mu_x[i] * mu_y[i];
            acc += ((2.0 * mu_x[i] * mu_y[i] + c1) * (2.0 * cov + c2)) /
                   ((mu_x[i] * mu_x[i] + mu_y[i] * mu_y[i] + c1) * (var_x + var_y + c2));
        }
        channel_sum += acc / static_cast<double>(mu_x.size());
    }
    return channel_sum / 3.0;
}

ProtocolReport evaluate_protocol(const mapping::GlobalMapping& model_f,
                                 const mapping::GlobalMapping& model_g,
                                 const std::vector<EvalPair>& pairs) {
    if (pairs.empty()) throw std::invalid_argument("evaluate_protocol: no pairs");
    std::vector<double> a, b, c;
    double ssim_sum = 0.0;
    for (const EvalPair& p : pairs) {
        const Image rec_xyz = mapping::apply(model_f, p.srgb);
        const Image rec_srgb = mapping::apply(model_g, rec_xyz);
        const Image gt_srgb = mapping::apply(model_g, p.xyz);
        a.push_back(psnr(rec_xyz, p.xyz));
        b.push_back(psnr(rec_srgb, p.srgb));
        c.push_back(psnr(gt_srgb, p.srgb));
        ssim_sum += ssim(rec_xyz, p.xyz);
    }
    ProtocolReport r;
    r.srgb_to_xyz = psnr_stats(a);
    r.rec_xyz_to_srgb = psnr_stats(b);
    r.gt_xyz_to_srgb = psnr_stats(c);
    r.ssim_avg = ssim_sum / static_cast<double>(pairs.size());
    return r;
}

namespace {

void format_column(std::string& out, const char* label, const PsnrReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "column \"%s\" Avg %.4f Q1 %.4f Q2 %.4f Q3 %.4f\n", label,
                  r.avg, r.q1, r.q2, r.q3);
    out += buf;
}

}  // namespace

std::string format_report(const ProtocolReport& report, std::string_view method_name) {
    std::string out = "# derender evaluation report v1\n";
    out += "method " + std::string(method_name) + "\n";
    out += "images " + std::to_string(report.srgb_to_xyz.per_image.size()) + "\n";
    format_column(out, "sRGB → XYZ", report.srgb_to_xyz);
    format_column(out, "Rec. XYZ → sRGB", report.rec_xyz_to_srgb);
    format_column(out, "GT XYZ → sRGB", report.gt_xyz_to_srgb);
    char buf[64];
    std::snprintf(buf, sizeof buf, "ssim_avg %.6f\n", report.ssim_avg);
    out += buf;
    return out;
}

}  // namespace derender::metrics
