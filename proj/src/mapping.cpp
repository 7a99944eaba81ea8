// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the derender project.

#include "derender/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace derender::mapping {

const char* to_string(Direction d) { return d == Direction::ForwardF ? "F" : "G"; }

std::vector<double> curve_grid(Direction d, int knots) {
    if (knots < 1) throw std::invalid_argument("curve needs at least one segment");
    std::vector<double> grid(knots + 1);
    for (int i = 0; i <= knots; ++i) {
        const double u = static_cast<double>(i) / knots;
        grid[i] = d == Direction::ForwardF ? u : std::pow(u, 2.2);
    }
    grid[0] = 0.0;
    grid[knots] = 1.0;
    return grid;
}

CurveCache make_curve_cache(const ToneCurve& curve) {
    const int k = curve.segments();
    CurveCache cache;
    cache.delta.resize(k);
    cache.y.resize(k + 1);
    double max_logit = curve.logits[0];
    for (double l : curve.logits) max_logit = std::max(max_logit, l);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        cache.delta[i] = std::exp(curve.logits[i] - max_logit);
        sum += cache.delta[i];
    }
    cache.y[0] = 0.0;
    for (int i = 0; i < k; ++i) {
        cache.delta[i] /= sum;
        cache.y[i + 1] = cache.y[i] + cache.delta[i];
    }
    cache.y[k] = 1.0;
    return cache;
}

CurvePoint curve_eval(const ToneCurve& curve, const CurveCache& cache, double v) {
    const int k = curve.segments();
    // First knot >= v; at an interior knot this picks the left segment.
    auto it = std::lower_bound(curve.grid.begin() + 1, curve.grid.end(), v);
    int seg = static_cast<int>(it - curve.grid.begin()) - 1;
    seg = std::clamp(seg, 0, k - 1);
    const double width = curve.grid[seg + 1] - curve.grid[seg];
    CurvePoint p;
    p.segment = seg;
    p.t = std::clamp((v - curve.grid[seg]) / width, 0.0, 1.0);
    p.slope = cache.delta[seg] / width;
    p.value = cache.y[seg] + p.t * cache.delta[seg];
    return p;
}

void curve_vjp_logits(const CurveCache& cache, const CurvePoint& at, double cot,
                      std::span<double> grad) {
    // T = sum_m w_m * delta_m with w_m in {1, t, 0}; through the softmax,
    // dT/dlogit_m = delta_m * (w_m - T).
    const int k = static_cast<int>(cache.delta.size());
    for (int m = 0; m < k; ++m) {
        const double w = m < at.segment ? 1.0 : (m == at.segment ? at.t : 0.0);
        grad[m] += cot * cache.delta[m] * (w - at.value);
    }
}

std::array<double, 9> poly_basis(const Triple& c) {
    return {c.c0,        c.c1,        c.c2,        c.c0 * c.c0, c.c1 * c.c1,
            c.c2 * c.c2, c.c0 * c.c1, c.c0 * c.c2, c.c1 * c.c2};
}

std::vector<double> GlobalMapping::param_vector() const {
    std::vector<double> p;
    p.reserve(param_count());
    for (const ToneCurve& c : curves) p.insert(p.end(), c.logits.begin(), c.logits.end());
    for (const auto& row : matrix.coeff) p.insert(p.end(), row.begin(), row.end());
    return p;
}

void GlobalMapping::set_param_vector(std::span<const double> params) {
    if (params.size() != param_count())
        throw std::invalid_argument("param_vector length mismatch");
    std::size_t pos = 0;
    for (ToneCurve& c : curves) {
        c.logits.assign(params.begin() + pos, params.begin() + pos + knots);
        pos += knots;
    }
    for (auto& row : matrix.coeff)
        for (double& v : row) v = params[pos++];
}

namespace {

std::vector<double> gamma_increment_logits(int knots, double gamma) {
    // log of the increments of v^gamma sampled on the uniform grid,
    // centered to zero mean (softmax-invariant gauge).
    std::vector<double> logits(knots);
    double mean = 0.0;
    for (int i = 0; i < knots; ++i) {
        const double a = std::pow(static_cast<double>(i) / knots, gamma);
        const double b = std::pow(static_cast<double>(i + 1) / knots, gamma);
        logits[i] = std::log(b - a);
        mean += logits[i];
    }
    mean /= knots;
    for (double& l : logits) l -= mean;
    return logits;
}

}  // namespace

GlobalMapping init_baseline(Direction direction, int knots) {
    GlobalMapping m;
    m.direction = direction;
    m.knots = knots;
    const std::vector<double> grid = curve_grid(direction, knots);
    std::vector<double> logits;
    if (direction == Direction::ForwardF) {
        logits = gamma_increment_logits(knots, 2.2);
    } else {
        // Ordinates i/K on the power grid: equal increments, all-zero logits.
        // This curve is the exact PWL inverse of the forward baseline curve.
        logits.assign(knots, 0.0);
    }
    for (ToneCurve& c : m.curves) {
        c.grid = grid;
        c.logits = logits;
    }
    const Mat3& lin = direction == Direction::ForwardF ? kSrgbToXyz : xyz_to_srgb_matrix();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m.matrix.coeff[r][c] = lin[r][c];
    return m;
}

namespace {

struct CacheSet {
    std::array<CurveCache, 3> c;
};

CacheSet make_caches(const GlobalMapping& m) {
    return {{{make_curve_cache(m.curves[0]), make_curve_cache(m.curves[1]),
              make_curve_cache(m.curves[2])}}};
}

Triple map_pixel_cached(const GlobalMapping& m, const CacheSet& cs, const Triple& in,
                        bool clamp_output, ClampStats* stats) {
    ClampStats dummy;
    ClampStats& st = stats ? *stats : dummy;
    if (m.direction == Direction::ForwardF) {
        Triple t;
        for (int k = 0; k < 3; ++k) t[k] = curve_eval(m.curves[k], cs.c[k], in[k]).value;
        const auto phi = poly_basis(t);
        Triple out;
        for (int r = 0; r < 3; ++r) {
            double acc = 0.0;
            for (int j = 0; j < 9; ++j) acc += m.matrix.coeff[r][j] * phi[j];
            out[r] = clamp_output ? clamp01_counted(acc, st) : acc;
        }
        return out;
    }
    const auto phi = poly_basis(in);
    Triple out;
    for (int r = 0; r < 3; ++r) {
        double acc = 0.0;
        for (int j = 0; j < 9; ++j) acc += m.matrix.coeff[r][j] * phi[j];
        // Clamp ahead of the curve: the curve maps [0,1] onto [0,1], so this
        // is where the range can escape.
        if (clamp_output) acc = clamp01_counted(acc, st);
        out[r] = curve_eval(m.curves[r], cs.c[r], std::clamp(acc, 0.0, 1.0)).value;
    }
    return out;
}

}  // namespace

Triple map_pixel(const GlobalMapping& model, const Triple& in, bool clamp_output) {
    const CacheSet cs = make_caches(model);
    return map_pixel_cached(model, cs, in, clamp_output, nullptr);
}

Image apply(const GlobalMapping& model, const Image& in, ClampStats* stats) {
    if (in.state != model.input_state())
        throw std::invalid_argument(std::string("apply: image state ") + to_string(in.state) +
                                    " does not match model input " +
                                    to_string(model.input_state()));
    const CacheSet cs = make_caches(model);
    Image out(in.width, in.height, model.output_state());
    ClampStats local;
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x)
            out.set_pixel(x, y, map_pixel_cached(model, cs, in.pixel(x, y), true, &local));
    if (stats) stats->merge(local);
    return out;
}

void apply_vjp(const GlobalMapping& model, const Image& in, const Image& output_cotangent,
               std::span<double> param_grad, Image* input_cotangent) {
    if (!in.same_shape(output_cotangent))
        throw std::invalid_argument("apply_vjp: cotangent shape mismatch");
    if (param_grad.size() != model.param_count())
        throw std::invalid_argument("apply_vjp: gradient buffer size mismatch");
    const CacheSet cs = make_caches(model);
    const int k = model.knots;
    if (input_cotangent) *input_cotangent = Image(in.width, in.height, in.state);
    std::span<double> curve_grad[3] = {param_grad.subspan(0, k), param_grad.subspan(k, k),
                                       param_grad.subspan(2 * static_cast<std::size_t>(k), k)};
    std::span<double> mat_grad = param_grad.subspan(3 * static_cast<std::size_t>(k), 27);

    for (int py = 0; py < in.height; ++py)
        for (int px = 0; px < in.width; ++px) {
            const Triple input = in.pixel(px, py);
            const Triple cot = output_cotangent.pixel(px, py);

            if (model.direction == Direction::ForwardF) {
                CurvePoint pts[3];
                Triple t;
                for (int c = 0; c < 3; ++c) {
                    pts[c] = curve_eval(model.curves[c], cs.c[c], std::clamp(input[c], 0.0, 1.0));
                    t[c] = pts[c].value;
                }
                const auto phi = poly_basis(t);
                Triple u = cot;
                for (int r = 0; r < 3; ++r) {
                    double acc = 0.0;
                    for (int j = 0; j < 9; ++j) acc += model.matrix.coeff[r][j] * phi[j];
                    if (acc < 0.0 || acc > 1.0) u[r] = 0.0;  // clamped: zero gradient
                }
                double w[9];
                for (int j = 0; j < 9; ++j)
                    w[j] = u.c0 * model.matrix.coeff[0][j] + u.c1 * model.matrix.coeff[1][j] +
                           u.c2 * model.matrix.coeff[2][j];
                for (int r = 0; r < 3; ++r)
                    for (int j = 0; j < 9; ++j) mat_grad[r * 9 + j] += u[r] * phi[j];
                const Triple v = {
                    w[0] + 2.0 * t.c0 * w[3] + t.c1 * w[6] + t.c2 * w[7],
                    w[1] + 2.0 * t.c1 * w[4] + t.c0 * w[6] + t.c2 * w[8],
                    w[2] + 2.0 * t.c2 * w[5] + t.c0 * w[7] + t.c1 * w[8],
                };
                for (int c = 0; c < 3; ++c)
                    curve_vjp_logits(cs.c[c], pts[c], v[c], curve_grad[c]);
                if (input_cotangent)
                    input_cotangent->set_pixel(px, py, {v.c0 * pts[0].slope, v.c1 * pts[1].slope,
                                                        v.c2 * pts[2].slope});
            } else {
                const auto phi = poly_basis(input);
                Triple m_raw;
                for (int r = 0; r < 3; ++r) {
                    double acc = 0.0;
                    for (int j = 0; j < 9; ++j) acc += model.matrix.coeff[r][j] * phi[j];
                    m_raw[r] = acc;
                }
                Triple z;  // cotangent on the matrix output
                for (int r = 0; r < 3; ++r) {
                    const double mc = std::clamp(m_raw[r], 0.0, 1.0);
                    const CurvePoint pt = curve_eval(model.curves[r], cs.c[r], mc);
                    curve_vjp_logits(cs.c[r], pt, cot[r], curve_grad[r]);
                    const bool clamped = m_raw[r] < 0.0 || m_raw[r] > 1.0;
                    z[r] = clamped ? 0.0 : cot[r] * pt.slope;
                }
                for (int r = 0; r < 3; ++r)
                    for (int j = 0; j < 9; ++j) mat_grad[r * 9 + j] += z[r] * phi[j];
                if (input_cotangent) {
                    double w[9];
                    for (int j = 0; j < 9; ++j)
                        w[j] = z.c0 * model.matrix.coeff[0][j] + z.c1 * model.matrix.coeff[1][j] +
                               z.c2 * model.matrix.coeff[2][j];
                    input_cotangent->set_pixel(
                        px, py,
                        {w[0] + 2.0 * input.c0 * w[3] + input.c1 * w[6] + input.c2 * w[7],
                         w[1] + 2.0 * input.c1 * w[4] + input.c0 * w[6] + input.c2 * w[8],
                         w[2] + 2.0 * input.c2 * w[5] + input.c0 * w[7] + input.c1 * w[8]});
                }
            }
        }
}

// -- serialization -----------------------------------------------------------

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'D', 'R', 'M', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

struct Reader {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > bytes.size()) throw std::runtime_error("model record truncated");
    }
    std::uint8_t u8() {
        need(1);
        return bytes[pos++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos++]) << (8 * i);
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[pos++]) << (8 * i);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
};

}  // namespace

std::vector<std::uint8_t> serialize_model(const GlobalMapping& model, std::string_view tag) {
    std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
    put_u32(out, kVersion);
    out.push_back(model.direction == Direction::ForwardF ? 0 : 1);
    put_u32(out, static_cast<std::uint32_t>(model.knots));
    const std::vector<double> params = model.param_vector();
    put_u32(out, static_cast<std::uint32_t>(params.size()));
    for (double p : params) put_f64(out, p);
    put_u32(out, static_cast<std::uint32_t>(tag.size()));
    out.insert(out.end(), tag.begin(), tag.end());
    return out;
}

GlobalMapping deserialize_model(std::span<const std::uint8_t> bytes, std::string* tag) {
    Reader r{bytes};
    r.need(4);
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
        throw std::runtime_error("not a model record (bad magic)");
    r.pos = 4;
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw std::runtime_error("unsupported model format version " + std::to_string(version));
    const std::uint8_t dir = r.u8();
    if (dir > 1) throw std::runtime_error("invalid model direction byte");
    const std::uint32_t knots = r.u32();
    if (knots < 1 || knots > 1u << 20) throw std::runtime_error("implausible knot count");
    const std::uint32_t nparams = r.u32();
    if (nparams != 3 * knots + 27) throw std::runtime_error("corrupted length field");
    std::vector<double> params(nparams);
    for (double& p : params) {
        p = r.f64();
        if (!std::isfinite(p)) throw std::runtime_error("non-finite parameter in model record");
    }
    const std::uint32_t tag_len = r.u32();
    r.need(tag_len);
    if (tag) tag->assign(reinterpret_cast<const char*>(bytes.data()) + r.pos, tag_len);
    r.pos += tag_len;
    if (r.pos != bytes.size()) throw std::runtime_error("trailing bytes after model record");

    GlobalMapping m;
    m.direction = dir == 0 ? Direction::ForwardF : Direction::InverseG;
    m.knots = static_cast<int>(knots);
    const std::vector<double> grid = curve_grid(m.direction, m.knots);
    for (ToneCurve& c : m.curves) {
        c.grid = grid;
        c.logits.assign(m.knots, 0.0);
    }
    m.set_param_vector(params);
    return m;
}

}  // namespace derender::mapping
