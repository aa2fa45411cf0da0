#pragma once

// Least-squares fit of f(x) = offset + amplitude * exp(-(x - mu)^2 / (2 sigma^2))
// by damped Gauss-Newton (Levenberg-Marquardt) with box constraints.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace qpde {

struct FitPoint {
    double x;
    double y;
};

struct GaussianFit {
    double mu = 0.0;
    double sigma = 1.0;
    double amplitude = 0.0;
    double offset = 0.0;
    bool converged = false;
    bool fallback = false;
    double residual_norm = 0.0;
    int iterations = 0;
};

struct FitOptions {
    int max_iterations = 500;
    // offset and amplitude describe a probability curve, so both live in [0, 1]
    double offset_min = 0.0;
    double offset_max = 1.0;
    double amplitude_min = 0.0;
    double amplitude_max = 1.0;
    // sigma bounds as multiples of the sampled window width
    double sigma_min_rel = 1e-3;
    double sigma_max_rel = 100.0;
};

inline double gaussian_model(double x, double offset, double amplitude, double mu, double sigma)
{
    const double z = (x - mu) / sigma;
    return offset + amplitude * std::exp(-0.5 * z * z);
}

namespace detail {

// Solves the 4x4 system a x = b in place by partial-pivot elimination.
inline bool solve4(std::array<std::array<double, 4>, 4> a, std::array<double, 4> b, std::array<double, 4>& x)
{
    for (int c = 0; c < 4; ++c) {
        int piv = c;
        for (int r = c + 1; r < 4; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) {
                piv = r;
            }
        }
        if (std::abs(a[piv][c]) < 1e-300) {
            return false;
        }
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (int r = c + 1; r < 4; ++r) {
            const double f = a[r][c] / a[c][c];
            for (int k = c; k < 4; ++k) {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    for (int r = 3; r >= 0; --r) {
        double s = b[r];
        for (int k = r + 1; k < 4; ++k) {
            s -= a[r][k] * x[k];
        }
        x[r] = s / a[r][r];
    }
    return true;
}

inline double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Probability-weighted centroid of the points at or above the median, with
/// sigma a quarter of the window. Always flagged non-converged.
inline GaussianFit fallback_estimate(std::span<const FitPoint> pts)
{
    std::vector<double> ys(pts.size());
    std::transform(pts.begin(), pts.end(), ys.begin(), [](const FitPoint& p) { return p.y; });
    const double med = detail::median(ys);
    double wsum = 0.0;
    double xsum = 0.0;
    for (const auto& p : pts) {
        if (p.y >= med) {
            wsum += p.y;
            xsum += p.y * p.x;
        }
    }
    const auto [lo, hi] = std::minmax_element(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.x < b.x; });
    GaussianFit f;
    f.mu = wsum > 0.0 ? xsum / wsum : 0.5 * (lo->x + hi->x);
    f.sigma = std::max(0.25 * (hi->x - lo->x), 1e-12);
    f.amplitude = *std::max_element(ys.begin(), ys.end()) - *std::min_element(ys.begin(), ys.end());
    f.offset = *std::min_element(ys.begin(), ys.end());
    f.converged = false;
    f.fallback = true;
    return f;
}

inline GaussianFit fit_gaussian(std::span<const FitPoint> pts, const FitOptions& opt = {})
{
    if (pts.size() < 5) {
        throw std::invalid_argument("fit_gaussian: at least 5 points required");
    }
    double ymin = pts[0].y, ymax = pts[0].y, xmin = pts[0].x, xmax = pts[0].x;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!std::isfinite(pts[i].x) || !std::isfinite(pts[i].y)) {
            throw std::invalid_argument("fit_gaussian: non-finite data");
        }
        if (pts[i].y > ymax) {
            ymax = pts[i].y;
            arg = i;
        }
        ymin = std::min(ymin, pts[i].y);
        xmin = std::min(xmin, pts[i].x);
        xmax = std::max(xmax, pts[i].x);
    }
    const double width = xmax - xmin;
    if (width <= 0.0 || ymax - ymin < 1e-12) {
        return fallback_estimate(pts);
    }

    const std::array<double, 4> lo{opt.offset_min, opt.amplitude_min, -INFINITY, opt.sigma_min_rel * width};
    const std::array<double, 4> hi{opt.offset_max, opt.amplitude_max, INFINITY, opt.sigma_max_rel * width};
    auto project = [&](std::array<double, 4>& p) {
        for (int k = 0; k < 4; ++k) {
            p[k] = std::clamp(p[k], lo[k], hi[k]);
        }
    };
    auto cost = [&](const std::array<double, 4>& p) {
        double s = 0.0;
        for (const auto& pt : pts) {
            const double r = gaussian_model(pt.x, p[0], p[1], p[2], p[3]) - pt.y;
            s += r * r;
        }
        return s;
    };

    std::array<double, 4> p{ymin, ymax - ymin, pts[arg].x, 0.25 * width};
    project(p);
    double c = cost(p);
    double lambda = 1e-3;
    bool done = false;
    int stalls = 0;
    int it = 0;
    for (; it < opt.max_iterations && !done; ++it) {
        std::array<std::array<double, 4>, 4> jtj{};
        std::array<double, 4> jtr{};
        for (const auto& pt : pts) {
            const double z = (pt.x - p[2]) / p[3];
            const double e = std::exp(-0.5 * z * z);
            const std::array<double, 4> g{1.0, e, p[1] * e * z / p[3], p[1] * e * z * z / p[3]};
            const double r = gaussian_model(pt.x, p[0], p[1], p[2], p[3]) - pt.y;
            for (int a = 0; a < 4; ++a) {
                jtr[a] += g[a] * r;
                for (int b = 0; b < 4; ++b) {
                    jtj[a][b] += g[a] * g[b];
                }
            }
        }
        // parameters pinned at a bound with the descent direction pointing
        // outward are frozen for this step
        std::array<bool, 4> frozen{};
        for (int a = 0; a < 4; ++a) {
            frozen[a] = (p[a] <= lo[a] && jtr[a] > 0.0) || (p[a] >= hi[a] && jtr[a] < 0.0);
        }
        bool accepted = false;
        while (!accepted) {
            auto m = jtj;
            std::array<double, 4> rhs{-jtr[0], -jtr[1], -jtr[2], -jtr[3]};
            for (int a = 0; a < 4; ++a) {
                m[a][a] += lambda * std::max(jtj[a][a], 1e-12);
                if (frozen[a]) {
                    for (int b = 0; b < 4; ++b) {
                        m[a][b] = m[b][a] = 0.0;
                    }
                    m[a][a] = 1.0;
                    rhs[a] = 0.0;
                }
            }
            std::array<double, 4> step{};
            if (!detail::solve4(m, rhs, step)) {
                lambda *= 10.0;
                if (lambda > 1e16) {
                    done = true;
                    break;
                }
                continue;
            }
            auto trial = p;
            for (int a = 0; a < 4; ++a) {
                trial[a] += step[a];
            }
            project(trial);
            const double ct = cost(trial);
            if (ct <= c) {
                double moved = 0.0;
                for (int a = 0; a < 4; ++a) {
                    moved = std::max(moved, std::abs(trial[a] - p[a]) / (std::abs(p[a]) + 1e-12));
                }
                const double rel = (c - ct) / std::max(c, 1e-300);
                p = trial;
                c = ct;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                stalls = rel < 1e-14 ? stalls + 1 : 0;
                if (moved < 1e-12 || stalls >= 3 || c < 1e-30) {
                    done = true;
                }
            } else {
                lambda *= 4.0;
                if (lambda > 1e16) {
                    done = true;
                    break;
                }
            }
        }
    }

    GaussianFit f;
    f.offset = p[0];
    f.amplitude = p[1];
    f.mu = p[2];
    f.sigma = p[3];
    f.residual_norm = std::sqrt(c);
    f.iterations = it;
    f.converged = done && std::isfinite(c) && f.amplitude > 0.0 && f.sigma > lo[3] && f.sigma < hi[3];
    if (!f.converged) {
        auto fb = fallback_estimate(pts);
        fb.residual_norm = f.residual_norm;
        fb.iterations = f.iterations;
        return fb;
    }
    return f;
}

}  // namespace qpde
