#include "duskseg/bilateral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <vector>

#include "duskseg/errors.hpp"

namespace duskseg {

void BilateralParams::check() const {
    if (sigma_s <= 0.0 || sigma_r <= 0.0)
        throw validation_error("bilateral sigmas must be positive");
    if (truncation_radius_factor <= 0.0)
        throw validation_error("truncation radius factor must be positive");
    if (downsample_factor < 1)
        throw validation_error("downsample factor must be >= 1");
}

int BilateralParams::radius() const {
    return static_cast<int>(std::ceil(truncation_radius_factor * sigma_s));
}

namespace {

// Spatial kernel over the clipped square window, tabulated once per call.
// Entries equal exp(-(dx*dx+dy*dy)/(2*sigma_s^2)) exactly as a direct
// evaluation would compute them.
std::vector<double> spatial_table(int radius, double sigma_s) {
    const int side = 2 * radius + 1;
    std::vector<double> table(static_cast<std::size_t>(side) * side);
    const double inv = 1.0 / (2.0 * sigma_s * sigma_s);
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            table[static_cast<std::size_t>(dy + radius) * side + (dx + radius)] =
                std::exp(-(static_cast<double>(dx) * dx + static_cast<double>(dy) * dy) * inv);
    return table;
}

// Exact path: full-resolution window sum with direct range kernel.
SoftPredictionTensor filter_exact(const SoftPredictionTensor& soft, const LabImage& ref,
                                  double sigma_s, double sigma_r, int radius) {
    const int w = soft.width(), h = soft.height(), C = soft.channels();
    const int side = 2 * radius + 1;
    const std::vector<double> spatial = spatial_table(radius, sigma_s);
    const double range_inv = 1.0 / (2.0 * sigma_r * sigma_r);

    SoftPredictionTensor out(w, h, C);
#pragma omp parallel
    {
        std::vector<double> acc(C);
#pragma omp for schedule(dynamic, 4)
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const LabPixel center = ref.px.at(x, y);
                std::fill(acc.begin(), acc.end(), 0.0);
                const int y0 = std::max(0, y - radius), y1 = std::min(h - 1, y + radius);
                const int x0 = std::max(0, x - radius), x1 = std::min(w - 1, x + radius);
                for (int qy = y0; qy <= y1; ++qy) {
                    const LabPixel* lrow = ref.px.row(qy);
                    const float* srow = soft.pixel(0, qy);
                    const double* stab =
                        &spatial[static_cast<std::size_t>(qy - y + radius) * side +
                                 (x0 - x + radius)];
                    for (int qx = x0; qx <= x1; ++qx) {
                        const LabPixel q = lrow[qx];
                        const double dl = static_cast<double>(q.L) - center.L;
                        const double da = static_cast<double>(q.a) - center.a;
                        const double db = static_cast<double>(q.b) - center.b;
                        const double wgt =
                            stab[qx - x0] * std::exp(-(dl * dl + da * da + db * db) * range_inv);
                        const float* sq = srow + static_cast<std::size_t>(qx) * C;
                        for (int c = 0; c < C; ++c) acc[c] += wgt * sq[c];
                    }
                }
                // The center pixel contributes weight 1, so the total is
                // never zero.
                double total = 0.0;
                for (int c = 0; c < C; ++c) total += acc[c];
                const double norm = 1.0 / total;
                float* op = out.pixel(x, y);
                for (int c = 0; c < C; ++c) op[c] = static_cast<float>(acc[c] * norm);
            }
        }
    }
    return out;
}

// Fast-path range kernel: Schraudolph-style exp approximation (relative
// error a few percent, fine for the downsampled path). x <= 0; very
// negative exponents clamp to exactly 0.
inline float approx_exp(float x) {
    const int i = static_cast<int>(12102203.16f * x) + 1064866805;
    return std::bit_cast<float>(std::max(i, 0));
}

// Guidance image as three planar float arrays: keeps the per-row weight
// computation vectorizable.
struct PlanarLab {
    std::vector<float> L, a, b;
    int width = 0;

    explicit PlanarLab(const LabImage& img) : width(img.width()) {
        const std::size_t n = static_cast<std::size_t>(img.width()) * img.height();
        L.resize(n);
        a.resize(n);
        b.resize(n);
        for (int y = 0; y < img.height(); ++y) {
            const LabPixel* row = img.px.row(y);
            const std::size_t base = static_cast<std::size_t>(y) * img.width();
            for (int x = 0; x < img.width(); ++x) {
                L[base + x] = row[x].L;
                a[base + x] = row[x].a;
                b[base + x] = row[x].b;
            }
        }
    }
};

// KC > 0 fixes the channel count at compile time, putting the
// accumulators in registers; KC == 0 is the runtime-channel fallback.
template <int KC>
SoftPredictionTensor filter_fast_impl(const SoftPredictionTensor& soft, const LabImage& ref,
                                      double sigma_s, double sigma_r, int radius) {
    const int w = soft.width(), h = soft.height();
    const int C = KC > 0 ? KC : soft.channels();
    const int side = 2 * radius + 1;
    const std::vector<double> spatial_d = spatial_table(radius, sigma_s);
    const std::vector<float> spatial(spatial_d.begin(), spatial_d.end());
    const PlanarLab lab(ref);
    const float exp_scale = static_cast<float>(-12102203.16 / (2.0 * sigma_r * sigma_r));

    SoftPredictionTensor out(w, h, C);
#pragma omp parallel
    {
        std::vector<float> wrow_buf(side);
        std::vector<float> acc_buf(KC > 0 ? 1 : C);
#pragma omp for schedule(dynamic, 2)
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t center = static_cast<std::size_t>(y) * w + x;
                const float lc = lab.L[center], ac = lab.a[center], bc = lab.b[center];
                float acc_fixed[KC > 0 ? KC : 1] = {};
                float* __restrict__ acc = KC > 0 ? acc_fixed : acc_buf.data();
                if (KC == 0) std::fill(acc_buf.begin(), acc_buf.end(), 0.f);

                const int y0 = std::max(0, y - radius), y1 = std::min(h - 1, y + radius);
                const int x0 = std::max(0, x - radius), x1 = std::min(w - 1, x + radius);
                const int len = x1 - x0 + 1;
                for (int qy = y0; qy <= y1; ++qy) {
                    const std::size_t base = static_cast<std::size_t>(qy) * w + x0;
                    const float* __restrict__ Lr = lab.L.data() + base;
                    const float* __restrict__ ar = lab.a.data() + base;
                    const float* __restrict__ br = lab.b.data() + base;
                    const float* __restrict__ stab =
                        &spatial[static_cast<std::size_t>(qy - y + radius) * side +
                                 (x0 - x + radius)];
                    float* __restrict__ wrow = wrow_buf.data();
                    for (int j = 0; j < len; ++j) {
                        const float dl = Lr[j] - lc;
                        const float da = ar[j] - ac;
                        const float db = br[j] - bc;
                        const int e = static_cast<int>(exp_scale *
                                                       (dl * dl + da * da + db * db)) +
                                      1064866805;
                        wrow[j] = stab[j] * std::bit_cast<float>(std::max(e, 0));
                    }
                    const float* srow = soft.pixel(x0, qy);
                    for (int j = 0; j < len; ++j) {
                        const float wgt = wrow[j];
                        if (wgt < 1e-7f) continue;
                        const float* __restrict__ sq = srow + static_cast<std::size_t>(j) * C;
                        for (int c = 0; c < C; ++c) acc[c] += wgt * sq[c];
                    }
                }
                float total = 0.f;
                for (int c = 0; c < C; ++c) total += acc[c];
                const float norm = total > 0.f ? 1.f / total : 0.f;
                float* op = out.pixel(x, y);
                for (int c = 0; c < C; ++c) op[c] = acc[c] * norm;
            }
        }
    }
    return out;
}

SoftPredictionTensor filter_fast(const SoftPredictionTensor& soft, const LabImage& ref,
                                 double sigma_s, double sigma_r, int radius) {
    if (soft.channels() == 19)
        return filter_fast_impl<19>(soft, ref, sigma_s, sigma_r, radius);
    return filter_fast_impl<0>(soft, ref, sigma_s, sigma_r, radius);
}

} // namespace

SoftPredictionTensor box_downsample(const SoftPredictionTensor& t, int factor) {
    if (factor < 1) throw validation_error("downsample factor must be >= 1");
    if (factor == 1) return t;
    const int w = t.width(), h = t.height(), C = t.channels();
    const int dw = (w + factor - 1) / factor, dh = (h + factor - 1) / factor;
    SoftPredictionTensor out(dw, dh, C);
#pragma omp parallel
    {
        std::vector<double> acc(C);
#pragma omp for schedule(static)
        for (int oy = 0; oy < dh; ++oy) {
            for (int ox = 0; ox < dw; ++ox) {
                std::fill(acc.begin(), acc.end(), 0.0);
                const int y0 = oy * factor, y1 = std::min(h, y0 + factor);
                const int x0 = ox * factor, x1 = std::min(w, x0 + factor);
                for (int y = y0; y < y1; ++y) {
                    const float* row = t.pixel(0, y);
                    for (int x = x0; x < x1; ++x) {
                        const float* p = row + static_cast<std::size_t>(x) * C;
                        for (int c = 0; c < C; ++c) acc[c] += p[c];
                    }
                }
                const double inv = 1.0 / (static_cast<double>(y1 - y0) * (x1 - x0));
                float* op = out.pixel(ox, oy);
                for (int c = 0; c < C; ++c) op[c] = static_cast<float>(acc[c] * inv);
            }
        }
    }
    return out;
}

LabImage box_downsample(const LabImage& img, int factor) {
    if (factor < 1) throw validation_error("downsample factor must be >= 1");
    if (factor == 1) return img;
    const int w = img.width(), h = img.height();
    const int dw = (w + factor - 1) / factor, dh = (h + factor - 1) / factor;
    LabImage out{Plane<LabPixel>(dw, dh)};
#pragma omp parallel for schedule(static)
    for (int oy = 0; oy < dh; ++oy) {
        for (int ox = 0; ox < dw; ++ox) {
            const int y0 = oy * factor, y1 = std::min(h, y0 + factor);
            const int x0 = ox * factor, x1 = std::min(w, x0 + factor);
            double sl = 0, sa = 0, sb = 0;
            for (int y = y0; y < y1; ++y) {
                const LabPixel* row = img.px.row(y);
                for (int x = x0; x < x1; ++x) {
                    sl += row[x].L;
                    sa += row[x].a;
                    sb += row[x].b;
                }
            }
            const double inv = 1.0 / (static_cast<double>(y1 - y0) * (x1 - x0));
            out.px.at(ox, oy) = LabPixel{static_cast<float>(sl * inv), static_cast<float>(sa * inv),
                                         static_cast<float>(sb * inv)};
        }
    }
    return out;
}

SoftPredictionTensor bilinear_upsample(const SoftPredictionTensor& t, int width, int height) {
    const int sw = t.width(), sh = t.height(), C = t.channels();
    const double sx = static_cast<double>(sw) / width;
    const double sy = static_cast<double>(sh) / height;
    SoftPredictionTensor out(width, height, C);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, sh - 1.0);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, sh - 1);
        const float ty = static_cast<float>(fy - y0);
        for (int x = 0; x < width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, sw - 1.0);
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, sw - 1);
            const float tx = static_cast<float>(fx - x0);
            const float* p00 = t.pixel(x0, y0);
            const float* p10 = t.pixel(x1, y0);
            const float* p01 = t.pixel(x0, y1);
            const float* p11 = t.pixel(x1, y1);
            float* op = out.pixel(x, y);
            float sum = 0.f;
            for (int c = 0; c < C; ++c) {
                const float top = p00[c] + tx * (p10[c] - p00[c]);
                const float bot = p01[c] + tx * (p11[c] - p01[c]);
                const float v = top + ty * (bot - top);
                op[c] = v;
                sum += v;
            }
            if (sum > 0.f) {
                const float inv = 1.f / sum;
                for (int c = 0; c < C; ++c) op[c] *= inv;
            }
        }
    }
    return out;
}

SoftPredictionTensor cross_bilateral_align(const SoftPredictionTensor& day_soft,
                                           const LabImage& dark, const BilateralParams& params) {
    params.check();
    if (day_soft.width() != dark.width() || day_soft.height() != dark.height())
        throw validation_error("bilateral inputs have mismatched dimensions");

    if (params.downsample_factor == 1)
        return filter_exact(day_soft, dark, params.sigma_s, params.sigma_r, params.radius());

    const int f = params.downsample_factor;
    const SoftPredictionTensor soft_ds = box_downsample(day_soft, f);
    const LabImage dark_ds = box_downsample(dark, f);
    const double sigma_ds = params.sigma_s / f;
    const int radius_ds = static_cast<int>(std::ceil(params.truncation_radius_factor * sigma_ds));
    SoftPredictionTensor filtered =
        filter_fast(soft_ds, dark_ds, sigma_ds, params.sigma_r, std::max(radius_ds, 1));
    return bilinear_upsample(filtered, day_soft.width(), day_soft.height());
}

} // namespace duskseg
