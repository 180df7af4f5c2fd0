#include "alime/segment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "alime/error.hpp"

namespace alime {
namespace {

double srgb_to_linear(double v) {
    return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
    constexpr double delta = 6.0 / 29.0;
    return t > delta * delta * delta ? std::cbrt(t) : t / (3 * delta * delta) + 4.0 / 29.0;
}

struct Center {
    std::vector<double> color;
    double x = 0.0;
    double y = 0.0;
};

/// Grid dimensions with nx*ny <= k, cells as square as possible.
std::pair<std::size_t, std::size_t> grid_shape(std::size_t w, std::size_t h, std::size_t k) {
    const double step = std::sqrt(static_cast<double>(w * h) / static_cast<double>(k));
    auto nx = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(static_cast<double>(w) / step)), 1, w);
    auto ny = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(static_cast<double>(h) / step)), 1, h);
    while (nx * ny > k) {
        const double cell_w = static_cast<double>(w) / static_cast<double>(nx);
        const double cell_h = static_cast<double>(h) / static_cast<double>(ny);
        if ((cell_w <= cell_h && nx > 1) || ny == 1)
            --nx;
        else
            --ny;
    }
    // Rounding can leave room for one more row or column of seeds.
    for (;;) {
        const bool wider = static_cast<double>(w) / static_cast<double>(nx) >= static_cast<double>(h) / static_cast<double>(ny);
        if (wider && nx < w && (nx + 1) * ny <= k)
            ++nx;
        else if (ny < h && nx * (ny + 1) <= k)
            ++ny;
        else if (nx < w && (nx + 1) * ny <= k)
            ++nx;
        else
            break;
    }
    return {nx, ny};
}

/// Keeps each label's largest 4-connected component; every other component
/// joins the adjacent label with the most pixels (lowest label on ties).
std::vector<int> enforce_connectivity(std::vector<int> labels, std::size_t w, std::size_t h, std::size_t n_labels) {
    const std::size_t n = w * h;
    std::vector<int> comp(n, -1);
    std::vector<int> comp_label;
    std::vector<std::size_t> comp_size;
    std::vector<std::size_t> queue;
    for (std::size_t start = 0; start < n; ++start) {
        if (comp[start] >= 0) continue;
        const int id = static_cast<int>(comp_label.size());
        const int lab = labels[start];
        comp[start] = id;
        queue.assign(1, start);
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            const std::size_t p = queue[qi];
            const std::size_t r = p / w, c = p % w;
            const std::size_t nbrs[4] = {r > 0 ? p - w : n, r + 1 < h ? p + w : n, c > 0 ? p - 1 : n,
                                         c + 1 < w ? p + 1 : n};
            for (std::size_t q : nbrs) {
                if (q < n && comp[q] < 0 && labels[q] == lab) {
                    comp[q] = id;
                    queue.push_back(q);
                }
            }
        }
        comp_label.push_back(lab);
        comp_size.push_back(queue.size());
    }

    const std::size_t n_comp = comp_label.size();
    std::vector<int> main_comp(n_labels, -1);
    for (std::size_t i = 0; i < n_comp; ++i) {
        auto& m = main_comp[static_cast<std::size_t>(comp_label[i])];
        if (m < 0 || comp_size[i] > comp_size[static_cast<std::size_t>(m)]) m = static_cast<int>(i);
    }

    std::vector<std::vector<int>> adjacent(n_comp);
    for (std::size_t p = 0; p < n; ++p) {
        const std::size_t r = p / w, c = p % w;
        if (c + 1 < w && comp[p] != comp[p + 1]) {
            adjacent[static_cast<std::size_t>(comp[p])].push_back(comp[p + 1]);
            adjacent[static_cast<std::size_t>(comp[p + 1])].push_back(comp[p]);
        }
        if (r + 1 < h && comp[p] != comp[p + w]) {
            adjacent[static_cast<std::size_t>(comp[p])].push_back(comp[p + w]);
            adjacent[static_cast<std::size_t>(comp[p + w])].push_back(comp[p]);
        }
    }

    std::vector<int> final_label(n_comp, -1);
    std::vector<std::size_t> label_size(n_labels, 0);
    std::size_t unresolved = 0;
    for (std::size_t i = 0; i < n_comp; ++i) {
        const auto lab = static_cast<std::size_t>(comp_label[i]);
        if (main_comp[lab] == static_cast<int>(i)) {
            final_label[i] = comp_label[i];
            label_size[lab] = comp_size[i];
        } else {
            ++unresolved;
        }
    }
    while (unresolved > 0) {
        std::size_t progress = 0;
        for (std::size_t i = 0; i < n_comp; ++i) {
            if (final_label[i] >= 0) continue;
            int best = -1;
            for (int j : adjacent[i]) {
                const int l = final_label[static_cast<std::size_t>(j)];
                if (l < 0) continue;
                if (best < 0 || label_size[static_cast<std::size_t>(l)] > label_size[static_cast<std::size_t>(best)] ||
                    (label_size[static_cast<std::size_t>(l)] == label_size[static_cast<std::size_t>(best)] && l < best))
                    best = l;
            }
            if (best < 0) continue;
            final_label[i] = best;
            label_size[static_cast<std::size_t>(best)] += comp_size[i];
            ++progress;
        }
        if (progress == 0) throw NumericError("connectivity enforcement did not converge");
        unresolved -= progress;
    }

    for (std::size_t p = 0; p < n; ++p) labels[p] = final_label[static_cast<std::size_t>(comp[p])];
    return labels;
}

/// Relabels to 0..S-1 in raster order of first appearance.
std::vector<int> compact_labels(std::vector<int> labels, std::size_t n_labels) {
    std::vector<int> remap(n_labels, -1);
    int next = 0;
    for (int& l : labels) {
        auto& r = remap[static_cast<std::size_t>(l)];
        if (r < 0) r = next++;
        l = r;
    }
    return labels;
}

}  // namespace

std::vector<double> to_lab(const Image& image) {
    const auto px = image.data();
    const std::size_t n = image.pixel_count();
    if (image.channels() == 1) {
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = 116.0 * lab_f(srgb_to_linear(px[i])) - 16.0;
        return out;
    }
    constexpr double xn = 0.95047, yn = 1.0, zn = 1.08883;
    std::vector<double> out(3 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = srgb_to_linear(px[3 * i]);
        const double g = srgb_to_linear(px[3 * i + 1]);
        const double b = srgb_to_linear(px[3 * i + 2]);
        const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
        const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
        const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
        const double fx = lab_f(x / xn), fy = lab_f(y / yn), fz = lab_f(z / zn);
        out[3 * i] = 116.0 * fy - 16.0;
        out[3 * i + 1] = 500.0 * (fx - fy);
        out[3 * i + 2] = 200.0 * (fy - fz);
    }
    return out;
}

SuperpixelSegmentation slic_segment(const Image& image, const SlicParams& params) {
    if (image.empty()) throw ParameterError("cannot segment an empty image");
    const std::size_t w = image.width(), h = image.height(), n = w * h;
    if (params.n_segments < 1) throw ParameterError("n_segments must be at least 1");
    if (params.n_segments > n) throw ParameterError("n_segments exceeds the pixel count");
    if (!(params.compactness >= 0.0) || !std::isfinite(params.compactness))
        throw ParameterError("compactness must be finite and non-negative");

    const std::size_t dims = image.channels() == 1 ? 1 : 3;
    const auto lab = to_lab(image);
    const auto [nx, ny] = grid_shape(w, h, params.n_segments);
    const double step = std::sqrt(static_cast<double>(n) / static_cast<double>(params.n_segments));
    const double spatial_weight = params.compactness / step;
    const double cell_w = static_cast<double>(w) / static_cast<double>(nx);
    const double cell_h = static_cast<double>(h) / static_cast<double>(ny);
    const double radius = 2.0 * std::max(cell_w, cell_h);

    std::vector<Center> centers;
    centers.reserve(nx * ny);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            Center c;
            c.x = (static_cast<double>(i) + 0.5) * cell_w - 0.5;
            c.y = (static_cast<double>(j) + 0.5) * cell_h - 0.5;
            const auto px = std::min<std::size_t>(w - 1, static_cast<std::size_t>(std::lround(std::max(0.0, c.x))));
            const auto py = std::min<std::size_t>(h - 1, static_cast<std::size_t>(std::lround(std::max(0.0, c.y))));
            const std::size_t p = py * w + px;
            c.color.assign(lab.begin() + static_cast<std::ptrdiff_t>(p * dims),
                           lab.begin() + static_cast<std::ptrdiff_t>((p + 1) * dims));
            centers.push_back(std::move(c));
        }
    }

    auto distance = [&](const Center& c, std::size_t p) {
        double dc = 0.0;
        for (std::size_t d = 0; d < dims; ++d) {
            const double diff = lab[p * dims + d] - c.color[d];
            dc += diff * diff;
        }
        const double dx = static_cast<double>(p % w) - c.x;
        const double dy = static_cast<double>(p / w) - c.y;
        return std::sqrt(dc) + spatial_weight * std::sqrt(dx * dx + dy * dy);
    };

    std::vector<int> labels(n, -1);
    std::vector<double> best(n);
    const std::size_t iters = std::max<std::size_t>(1, params.max_iters);
    for (std::size_t it = 0; it < iters; ++it) {
        std::vector<int> next(n, -1);
        std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
        for (std::size_t k = 0; k < centers.size(); ++k) {
            const auto& c = centers[k];
            const auto x0 = static_cast<std::size_t>(std::max(0.0, std::ceil(c.x - radius)));
            const auto x1 = static_cast<std::size_t>(std::min(static_cast<double>(w - 1), std::floor(c.x + radius)));
            const auto y0 = static_cast<std::size_t>(std::max(0.0, std::ceil(c.y - radius)));
            const auto y1 = static_cast<std::size_t>(std::min(static_cast<double>(h - 1), std::floor(c.y + radius)));
            for (std::size_t y = y0; y <= y1; ++y) {
                for (std::size_t x = x0; x <= x1; ++x) {
                    const std::size_t p = y * w + x;
                    const double d = distance(c, p);
                    if (d < best[p]) {
                        best[p] = d;
                        next[p] = static_cast<int>(k);
                    }
                }
            }
        }
        for (std::size_t p = 0; p < n; ++p) {
            if (next[p] >= 0) continue;
            for (std::size_t k = 0; k < centers.size(); ++k) {
                const double d = distance(centers[k], p);
                if (d < best[p]) {
                    best[p] = d;
                    next[p] = static_cast<int>(k);
                }
            }
        }
        const bool converged = next == labels;
        labels = std::move(next);
        if (converged) break;

        std::vector<Center> sums(centers.size(), Center{std::vector<double>(dims, 0.0), 0.0, 0.0});
        std::vector<std::size_t> counts(centers.size(), 0);
        for (std::size_t p = 0; p < n; ++p) {
            const auto k = static_cast<std::size_t>(labels[p]);
            for (std::size_t d = 0; d < dims; ++d) sums[k].color[d] += lab[p * dims + d];
            sums[k].x += static_cast<double>(p % w);
            sums[k].y += static_cast<double>(p / w);
            ++counts[k];
        }
        for (std::size_t k = 0; k < centers.size(); ++k) {
            if (counts[k] == 0) continue;
            const auto cnt = static_cast<double>(counts[k]);
            for (std::size_t d = 0; d < dims; ++d) centers[k].color[d] = sums[k].color[d] / cnt;
            centers[k].x = sums[k].x / cnt;
            centers[k].y = sums[k].y / cnt;
        }
    }

    labels = enforce_connectivity(std::move(labels), w, h, centers.size());
    labels = compact_labels(std::move(labels), centers.size());
    return SuperpixelSegmentation(w, h, std::move(labels));
}

std::vector<std::vector<double>> segment_stats(const SuperpixelSegmentation& seg, const Image& image) {
    if (seg.width() != image.width() || seg.height() != image.height())
        throw DimensionError("segmentation and image shapes differ");
    const std::size_t c = image.channels();
    std::vector<std::vector<double>> sums(seg.n_segments(), std::vector<double>(c, 0.0));
    const auto labels = seg.labels();
    const auto px = image.data();
    for (std::size_t p = 0; p < labels.size(); ++p)
        for (std::size_t ch = 0; ch < c; ++ch) sums[static_cast<std::size_t>(labels[p])][ch] += px[p * c + ch];
    const auto sizes = seg.segment_sizes();
    for (std::size_t s = 0; s < sums.size(); ++s)
        for (auto& v : sums[s]) v /= static_cast<double>(sizes[s]);
    return sums;
}

Image draw_boundaries(const Image& image, const SuperpixelSegmentation& seg) {
    if (seg.width() != image.width() || seg.height() != image.height())
        throw DimensionError("segmentation and image shapes differ");
    const std::size_t w = image.width(), h = image.height();
    Image out(w, h, 3);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            const int l = seg.label(r, c);
            const bool edge = (c + 1 < w && seg.label(r, c + 1) != l) || (r + 1 < h && seg.label(r + 1, c) != l);
            for (std::size_t ch = 0; ch < 3; ++ch) {
                const float v = image.at(r, c, image.channels() == 3 ? ch : 0);
                out.at(r, c, ch) = edge ? (ch == 0 ? 1.0f : 0.0f) : v;
            }
        }
    }
    return out;
}

}  // namespace alime
