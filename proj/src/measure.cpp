#include "cc/measure.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "cc/newton.hpp"

namespace cc {

int hausdorff_dimension(const CCStructure& S) {
    int nu = 0;
    for (int d : S.degrees) nu += d;
    return nu;
}

std::string MeasureEstimate::to_csv() const {
    std::ostringstream out;
    out.precision(12);
    out << "# nu=" << nu << "\n";
    out << "scale,value\n";
    for (size_t i = 0; i < scale_grid.size(); ++i)
        out << scale_grid[i] << "," << per_scale[i] << "\n";
    return out.str();
}

void for_each_lattice_center(const CCStructure& S, const Region& support, double r,
                             const std::function<void(const Point&)>& visit) {
    std::vector<int> counts(S.N);
    std::vector<double> spacing(S.N);
    for (int i = 0; i < S.N; ++i) {
        spacing[i] = std::pow(r, S.degrees[i]);
        counts[i] = std::max(
            1, static_cast<int>(std::ceil(2.0 * support.half_width[i] / spacing[i])));
    }
    std::vector<int> idx(S.N, 0);
    Point center(S.N);
    bool done = false;
    while (!done) {
        for (int i = 0; i < S.N; ++i)
            center[i] = support.center[i] - support.half_width[i] +
                        (idx[i] + 0.5) * spacing[i];
        visit(center);
        int d = 0;
        while (d < S.N && ++idx[d] == counts[d]) idx[d++] = 0;
        done = (d == S.N);
    }
}

MeasureEstimate measure_estimate(const CCStructure& S, const Indicator& indicator,
                                 const Region& support,
                                 const std::vector<double>& scale_grid,
                                 const std::string& metric_tag) {
    MeasureEstimate est;
    est.metric_tag = metric_tag;
    est.nu = hausdorff_dimension(S);
    est.scale_grid = scale_grid;

    for (double r : scale_grid) {
        double weight = std::pow(r, est.nu);
        double sum = 0.0;
        for_each_lattice_center(S, support, r, [&](const Point& center) {
            if (indicator(center)) sum += weight;
        });
        est.per_scale.push_back(sum);
    }
    est.value = est.per_scale.empty() ? 0.0 : est.per_scale.back();
    return est;
}

DensityEstimate density(const CCStructure& S, const Indicator& indicator,
                        const Point& x, const std::vector<double>& r_grid, int n,
                        std::uint64_t seed, const FlowOptions& opts) {
    DensityEstimate est;
    est.point = x;
    est.r_grid = r_grid;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    for (double r : r_grid) {
        int inside = 0, total = 0;
        for (int s = 0; s < n; ++s) {
            Vector y(S.N);
            for (int i = 0; i < S.N; ++i)
                y[i] = unit(rng) * std::pow(r, S.degrees[i]);
            try {
                Point u = coords1_forward(S, x, y, opts);
                ++total;
                if (indicator(u)) ++inside;
            } catch (const ChartExit&) {
            }
        }
        est.ratios.push_back(total > 0 ? static_cast<double>(inside) / total : 0.0);
    }
    est.limit_guess = est.ratios.empty() ? 0.0 : est.ratios.back();
    return est;
}

ApLimit ap_limit(const CCStructure& S, const SampledFn& f, const Point& x0,
                 const std::vector<double>& r_grid, int n, std::uint64_t seed,
                 double delta, double tol, const FlowOptions& opts) {
    ApLimit res;
    if (r_grid.empty() || n <= 0) return res;
    double r = *std::min_element(r_grid.begin(), r_grid.end());

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<double> vals;
    for (int s = 0; s < n; ++s) {
        Vector y(S.N);
        for (int i = 0; i < S.N; ++i)
            y[i] = unit(rng) * std::pow(r, S.degrees[i]);
        try {
            double v = f(coords1_forward(S, x0, y, opts));
            if (std::isfinite(v)) vals.push_back(v);
        } catch (const ChartExit&) {
        }
    }
    if (vals.size() < 10) return res;
    std::sort(vals.begin(), vals.end());
    // super-level sets of density <= delta are ignored on both sides
    auto quantile = [&](double q) {
        double pos = q * (vals.size() - 1);
        size_t lo = static_cast<size_t>(pos);
        double fr = pos - lo;
        return (lo + 1 < vals.size()) ? (1 - fr) * vals[lo] + fr * vals[lo + 1]
                                      : vals[lo];
    };
    res.lim_inf = quantile(delta);
    res.lim_sup = quantile(1.0 - delta);
    res.certified = (res.lim_sup - res.lim_inf) <= tol;
    res.value = 0.5 * (res.lim_inf + res.lim_sup);
    return res;
}

DoublingReport doubling_report(const CCStructure& S, const Region& region,
                               const std::vector<double>& r_grid, int n,
                               std::uint64_t seed, int mc_samples,
                               const FlowOptions& opts) {
    DoublingReport report;
    if (r_grid.empty() || n <= 0) return report;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    for (int s = 0; s < n; ++s) {
        Point x = region.center;
        for (int i = 0; i < S.N; ++i) x[i] += unit(rng) * region.half_width[i];
        double r = r_grid[s % r_grid.size()];

        // chart volume of B(x,rho) = integral of |det D theta_x| over the
        // graded box; estimate each box with its own sample so the small ball
        // is not starved (the r-box fills only 2^-nu of the 2r-box)
        auto theta = [&](const Vector& y) { return coords1_forward(S, x, y, opts); };
        auto box_volume = [&](double rho) {
            double vol = 1.0;
            for (int d : S.degrees) vol *= 2.0 * std::pow(rho, d);
            double acc = 0.0;
            int hits = 0;
            for (int t = 0; t < mc_samples; ++t) {
                Vector y(S.N);
                for (int i = 0; i < S.N; ++i)
                    y[i] = unit(rng) * std::pow(rho, S.degrees[i]);
                try {
                    acc += std::abs(fd_jacobian(theta, y, 1e-6).determinant());
                    ++hits;
                } catch (const ChartExit&) {
                }
            }
            return hits > 0 ? vol * acc / hits : 0.0;
        };
        double v_small = box_volume(r);
        double v_big = box_volume(2.0 * r);
        if (v_small <= 0.0) continue;
        report.C_hat = std::max(report.C_hat, v_big / v_small);
        ++report.sample_count;
    }
    return report;
}

}  // namespace cc
