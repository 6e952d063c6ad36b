#pragma once

#include "memdc/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace memdc {

[[nodiscard]] inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw ModelError("mean of an empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

/// Sample standard deviation (n - 1 denominator).
[[nodiscard]] inline double sample_std(std::span<const double> xs) {
    if (xs.size() < 2) throw ModelError("sample standard deviation needs at least two values");
    // Shifted by the first sample: exact zero for constant data.
    const double shift = xs[0];
    double s = 0.0;
    double ss = 0.0;
    for (double x : xs) {
        s += x - shift;
        ss += (x - shift) * (x - shift);
    }
    const double n = static_cast<double>(xs.size());
    return std::sqrt(std::max(0.0, (ss - s * s / n) / (n - 1.0)));
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_std = 0.0; // sqrt(SSR / (n - 2)), 0 for n = 2

    friend bool operator==(const LinearFit&, const LinearFit&) = default;
};

/// Ordinary least squares y = slope * x + intercept, computed on centered data.
[[nodiscard]] inline LinearFit fit_linear(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw ModelError("fit_linear: xs and ys differ in length");
    if (xs.size() < 2) throw ModelError("fit_linear needs at least two points");
    const double mx = mean(xs);
    const double my = mean(ys);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw ModelError("fit_linear: xs are all equal");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (xs.size() > 2) {
        double ssr = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double r = ys[i] - (fit.slope * xs[i] + fit.intercept);
            ssr += r * r;
        }
        fit.residual_std = std::sqrt(ssr / static_cast<double>(xs.size() - 2));
    }
    return fit;
}

[[nodiscard]] inline std::vector<double> detrend(std::span<const double> xs, std::span<const double> ys,
                                                 const LinearFit& fit) {
    std::vector<double> out(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) out[i] = ys[i] - (fit.slope * xs[i] + fit.intercept);
    return out;
}

struct NormalityTest {
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double statistic = 0.0; // Jarque-Bera
    double p_value = 1.0;   // chi-square with 2 dof: exp(-JB / 2)

    [[nodiscard]] bool passes(double significance = 0.05) const noexcept { return p_value > significance; }
};

[[nodiscard]] inline NormalityTest jarque_bera(std::span<const double> xs) {
    if (xs.size() < 8) throw ModelError("normality test needs at least 8 samples");
    const double m = mean(xs);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - m;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    const double n = static_cast<double>(xs.size());
    m2 /= n;
    m3 /= n;
    m4 /= n;
    NormalityTest t;
    if (!(m2 > 0.0)) {
        t.p_value = 0.0;
        t.statistic = INFINITY;
        return t;
    }
    t.skewness = m3 / std::pow(m2, 1.5);
    t.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    t.statistic = n / 6.0 * (t.skewness * t.skewness + 0.25 * t.excess_kurtosis * t.excess_kurtosis);
    t.p_value = std::exp(-0.5 * t.statistic);
    return t;
}

struct Histogram {
    double lo = 0.0;
    double width = 0.0;
    std::vector<std::size_t> counts;

    friend bool operator==(const Histogram&, const Histogram&) = default;
};

[[nodiscard]] inline Histogram histogram(std::span<const double> xs, std::size_t bins) {
    if (xs.empty() || bins == 0) throw ModelError("histogram needs samples and at least one bin");
    const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
    Histogram h;
    h.lo = *mn;
    h.width = (*mx - *mn) / static_cast<double>(bins);
    h.counts.assign(bins, 0);
    for (double x : xs) {
        std::size_t b = h.width > 0.0 ? static_cast<std::size_t>((x - h.lo) / h.width) : 0;
        ++h.counts[std::min(b, bins - 1)];
    }
    return h;
}

} // namespace memdc
