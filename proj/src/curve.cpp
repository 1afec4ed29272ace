#include "duskseg/curve.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <set>
#include <string>

#include "duskseg/errors.hpp"

namespace duskseg {

void EvalSample::check() const {
    if (soft.has_value() == hard.has_value())
        throw validation_error("sample needs exactly one of soft or hard prediction");
    if (!gt.px.same_shape(mask.px))
        throw validation_error("sample gt/mask dimensions differ");
    if (soft && (soft->width() != gt.width() || soft->height() != gt.height()))
        throw validation_error("sample soft prediction dimensions differ from gt");
    if (hard && !hard->px.same_shape(gt.px))
        throw validation_error("sample hard prediction dimensions differ from gt");
}

std::vector<double> make_theta_grid(int count, int num_classes) {
    if (count < 1)
        throw validation_error("theta grid needs at least one point");
    if (num_classes < 2)
        throw validation_error("theta grid needs at least 2 classes");
    const double lo = 1.0 / num_classes;
    std::vector<double> grid(count);
    grid[0] = lo;
    for (int i = 1; i + 1 < count; ++i)
        grid[i] = lo + (1.0 - lo) * i / (count - 1);
    if (count > 1) grid[count - 1] = 1.0;
    return grid;
}

std::vector<double> make_exact_theta_grid(const SampleSource& source, int num_classes) {
    const double lo = 1.0 / num_classes;
    std::set<double> cands;
    cands.insert(lo);
    for (int i = 0; i < source.size(); ++i) {
        const EvalSample s = source.load(i);
        if (!s.soft) continue;
        const auto& t = *s.soft;
        for (int y = 0; y < t.height(); ++y) {
            for (int x = 0; x < t.width(); ++x) {
                const float f = t.max_prob(x, y);
                if (f < 1.0f) {
                    // Smallest threshold that invalidates confidence-f pixels:
                    // one representative per constant piece of the curve.
                    const double cand = nextafterf(f, 2.0f);
                    if (cand > lo && cand <= 1.0) cands.insert(cand);
                }
            }
        }
    }
    return {cands.begin(), cands.end()};
}

namespace {

struct ClassDelta {
    std::int64_t tp = 0, fp = 0, fn = 0, ti = 0, fi = 0;
};

// Difference-array accumulator over the theta grid: a contribution on the
// half-open index segment [l, r) costs two updates instead of r - l.
struct SweepDeltas {
    int n_theta = 0;
    int n_class = 0;
    std::vector<ClassDelta> delta;       // (n_theta + 1) * n_class
    std::vector<std::int64_t> invalid;   // n_theta + 1

    SweepDeltas(int n, int c)
        : n_theta(n), n_class(c), delta(static_cast<std::size_t>(n + 1) * c), invalid(n + 1, 0) {}

    ClassDelta& at(int k, int c) { return delta[static_cast<std::size_t>(k) * n_class + c]; }

    void merge(const SweepDeltas& o) {
        for (std::size_t i = 0; i < delta.size(); ++i) {
            delta[i].tp += o.delta[i].tp;
            delta[i].fp += o.delta[i].fp;
            delta[i].fn += o.delta[i].fn;
            delta[i].ti += o.delta[i].ti;
            delta[i].fi += o.delta[i].fi;
        }
        for (std::size_t i = 0; i < invalid.size(); ++i) invalid[i] += o.invalid[i];
    }
};

void validate_grid(const std::vector<double>& grid, int num_classes) {
    if (grid.empty())
        throw validation_error("theta grid is empty");
    if (grid.front() != 1.0 / num_classes)
        throw validation_error("theta grid must start exactly at 1/C");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1])
            throw validation_error("theta grid must be strictly ascending");
    if (grid.back() > 1.0)
        throw validation_error("theta grid exceeds 1");
}

void accumulate_sample(SweepDeltas& d, const EvalSample& s, const ClassSet& classes,
                       const std::vector<double>& grid) {
    s.check();
    const int C = classes.count();
    if (s.soft && s.soft->channels() != C)
        throw validation_error("soft prediction channel count differs from class set");
    const std::uint8_t ignore = classes.ignore_value();
    const int n = d.n_theta;
    const int w = s.gt.width(), h = s.gt.height();

    auto tally_valid = [&](int l, int r, std::uint8_t gt_class, int pred_class) {
        if (pred_class == gt_class) {
            ++d.at(l, gt_class).tp; --d.at(r, gt_class).tp;
        } else {
            ++d.at(l, gt_class).fn; --d.at(r, gt_class).fn;
            if (pred_class < C) { ++d.at(l, pred_class).fp; --d.at(r, pred_class).fp; }
        }
    };
    auto tally_invalid = [&](int l, int r, std::uint8_t gt_class, bool j) {
        if (j) { ++d.at(l, gt_class).ti; --d.at(r, gt_class).ti; }
        else   { ++d.at(l, gt_class).fi; --d.at(r, gt_class).fi; }
    };

    for (int y = 0; y < h; ++y) {
        const std::uint8_t* gr = s.gt.px.row(y);
        const std::uint8_t* mr = s.mask.px.row(y);
        const std::uint8_t* pr = s.hard ? s.hard->px.row(y) : nullptr;
        const float* sp = s.soft ? s.soft->pixel(0, y) : nullptr;
        for (int x = 0; x < w; ++x) {
            const std::uint8_t g = gr[x];
            if (g != ignore && g >= C)
                throw validation_error("ground truth contains illegal value " +
                                       std::to_string(int(g)));
            if (sp) {
                int best = 0;
                const float* p = sp + static_cast<std::size_t>(x) * s.soft->channels();
                for (int c = 1; c < C; ++c)
                    if (p[c] > p[best]) best = c;
                const float f = p[best];
                // First grid index whose theta exceeds the confidence: the
                // pixel flips to invalid there. Never at index 0 (theta =
                // 1/C invalidates nothing).
                int k = static_cast<int>(
                    std::upper_bound(grid.begin(), grid.end(), static_cast<double>(f)) -
                    grid.begin());
                k = std::max(k, 1);
                if (g != ignore) {
                    if (k > 0) tally_valid(0, k, g, best);
                    if (k < n) tally_invalid(k, n, g, mr[x] != 0);
                }
                if (k < n) { ++d.invalid[k]; --d.invalid[n]; }
            } else {
                const std::uint8_t p = pr[x];
                if (g != ignore) {
                    if (p == kInvalidLabel) tally_invalid(0, n, g, mr[x] != 0);
                    else tally_valid(0, n, g, p);
                }
                if (p == kInvalidLabel) { ++d.invalid[0]; --d.invalid[n]; }
            }
        }
    }
}

} // namespace

SweepResult sweep_confusion(const SampleSource& source, const ClassSet& classes,
                            const std::vector<double>& theta_grid) {
    const int C = classes.count();
    validate_grid(theta_grid, C);
    const int n = static_cast<int>(theta_grid.size());
    const int count = source.size();

    SweepDeltas total(n, C);
    std::exception_ptr error;
#pragma omp parallel
    {
        SweepDeltas local(n, C);
#pragma omp for schedule(dynamic) nowait
        for (int i = 0; i < count; ++i) {
            try {
                const EvalSample s = source.load(i);
                accumulate_sample(local, s, classes, theta_grid);
            } catch (...) {
#pragma omp critical
                if (!error) error = std::current_exception();
            }
        }
#pragma omp critical
        total.merge(local);
    }
    if (error) std::rethrow_exception(error);

    // Prefix-sum the deltas into per-theta tallies.
    SweepResult result;
    result.per_theta.assign(n, ConfusionTallies(C));
    result.invalidated.assign(n, 0);
    std::vector<ClassDelta> run(C);
    std::int64_t run_invalid = 0;
    for (int k = 0; k < n; ++k) {
        run_invalid += total.invalid[k];
        result.invalidated[k] = static_cast<std::uint64_t>(run_invalid);
        ConfusionTallies& t = result.per_theta[k];
        t.theta = theta_grid[k];
        for (int c = 0; c < C; ++c) {
            run[c].tp += total.at(k, c).tp;
            run[c].fp += total.at(k, c).fp;
            run[c].fn += total.at(k, c).fn;
            run[c].ti += total.at(k, c).ti;
            run[c].fi += total.at(k, c).fi;
            t.per_class[c] = ClassTally{static_cast<std::uint64_t>(run[c].tp),
                                        static_cast<std::uint64_t>(run[c].fp),
                                        static_cast<std::uint64_t>(run[c].fn),
                                        static_cast<std::uint64_t>(run[c].ti),
                                        static_cast<std::uint64_t>(run[c].fi)};
        }
    }
    return result;
}

UIoUCurve build_curve(const SweepResult& sweep) {
    UIoUCurve curve;
    curve.points.reserve(sweep.per_theta.size());
    for (std::size_t k = 0; k < sweep.per_theta.size(); ++k) {
        const ConfusionTallies& t = sweep.per_theta[k];
        CurvePoint pt;
        pt.theta = t.theta;
        pt.per_class.resize(t.per_class.size());
        for (std::size_t c = 0; c < t.per_class.size(); ++c)
            pt.per_class[c] = uiou_per_class(t, static_cast<int>(c));
        pt.mean_uiou = mean_uiou(t);
        pt.invalidated_pixels = sweep.invalidated[k];
        curve.points.push_back(std::move(pt));
    }
    curve.argmax_index = 0;
    for (std::size_t k = 1; k < curve.points.size(); ++k)
        if (curve.points[k].mean_uiou > curve.points[curve.argmax_index].mean_uiou)
            curve.argmax_index = static_cast<int>(k);
    return curve;
}

UIoUCurve uiou_curve(const SampleSource& source, const ClassSet& classes,
                     const std::vector<double>& theta_grid) {
    return build_curve(sweep_confusion(source, classes, theta_grid));
}

} // namespace duskseg
