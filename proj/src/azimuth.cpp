#include "pirtrack/azimuth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pirtrack/errors.hpp"

namespace pirtrack {

namespace {

// Sparse table for O(1) range minimum.
class RangeMin {
public:
    explicit RangeMin(const std::vector<double>& x) {
        const std::size_t n = x.size();
        table_.push_back(x);
        for (std::size_t w = 1; 2 * w <= n; w *= 2) {
            const auto& prev = table_.back();
            std::vector<double> next(n - 2 * w + 1);
            for (std::size_t i = 0; i < next.size(); ++i) next[i] = std::min(prev[i], prev[i + w]);
            table_.push_back(std::move(next));
        }
    }
    // min over [lo, hi], inclusive
    double query(std::size_t lo, std::size_t hi) const {
        const std::size_t len = hi - lo + 1;
        std::size_t level = 0;
        while ((std::size_t{2} << level) <= len) ++level;
        return std::min(table_[level][lo], table_[level][hi + 1 - (std::size_t{1} << level)]);
    }

private:
    std::vector<std::vector<double>> table_;
};

double mad_sigma(std::vector<double> v) {
    if (v.empty()) return 0.0;
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    const double med = *mid;
    for (double& x : v) x = std::abs(x - med);
    std::nth_element(v.begin(), mid, v.end());
    return 1.4826 * *mid;
}

}  // namespace

std::vector<std::size_t> local_maxima(const std::vector<double>& x) {
    std::vector<std::size_t> out;
    const std::size_t n = x.size();
    if (n < 3) return out;
    std::size_t i = 1;
    while (i + 1 < n) {
        if (x[i - 1] < x[i]) {
            std::size_t ahead = i + 1;
            while (ahead + 1 < n && x[ahead] == x[i]) ++ahead;
            if (x[ahead] < x[i]) {
                out.push_back((i + ahead - 1) / 2);
                i = ahead;
                continue;
            }
        }
        ++i;
    }
    return out;
}

std::vector<double> peak_prominences(const std::vector<double>& x, const std::vector<std::size_t>& peaks) {
    const std::size_t n = x.size();
    std::vector<double> prom(peaks.size(), 0.0);
    if (peaks.empty()) return prom;

    // nearest strictly higher sample on each side, via monotonic stacks
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> left_higher(n, none), right_higher(n, none);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < n; ++i) {
        while (!stack.empty() && x[stack.back()] <= x[i]) stack.pop_back();
        left_higher[i] = stack.empty() ? none : stack.back();
        stack.push_back(i);
    }
    stack.clear();
    for (std::size_t i = n; i-- > 0;) {
        while (!stack.empty() && x[stack.back()] <= x[i]) stack.pop_back();
        right_higher[i] = stack.empty() ? none : stack.back();
        stack.push_back(i);
    }

    const RangeMin rmq(x);
    for (std::size_t k = 0; k < peaks.size(); ++k) {
        const std::size_t p = peaks[k];
        const std::size_t lo = left_higher[p] == none ? 0 : left_higher[p] + 1;
        const std::size_t hi = right_higher[p] == none ? n - 1 : right_higher[p] - 1;
        const double base = std::max(rmq.query(lo, p), rmq.query(p, hi));
        prom[k] = x[p] - base;
    }
    return prom;
}

std::vector<Extremum> detect_extrema(const SignalTrace& dhf, double min_prominence) {
    if (!(min_prominence > 0.0)) throw ConfigError("min_prominence must be > 0");
    const auto& x = dhf.samples;

    std::vector<Extremum> all;
    const auto peaks = local_maxima(x);
    const auto pp = peak_prominences(x, peaks);
    for (std::size_t k = 0; k < peaks.size(); ++k)
        if (pp[k] >= min_prominence) all.push_back({dhf.time(peaks[k]), x[peaks[k]], pp[k], ExtremumKind::Peak, peaks[k]});

    std::vector<double> neg(x.size());
    std::transform(x.begin(), x.end(), neg.begin(), [](double v) { return -v; });
    const auto troughs = local_maxima(neg);
    const auto tp = peak_prominences(neg, troughs);
    for (std::size_t k = 0; k < troughs.size(); ++k)
        if (tp[k] >= min_prominence)
            all.push_back({dhf.time(troughs[k]), x[troughs[k]], tp[k], ExtremumKind::Trough, troughs[k]});

    std::sort(all.begin(), all.end(), [](const Extremum& a, const Extremum& b) { return a.index < b.index; });

    std::vector<Extremum> out;
    for (const auto& e : all) {
        if (!out.empty() && out.back().kind == e.kind) {
            const bool more_extreme = e.kind == ExtremumKind::Peak ? e.value > out.back().value : e.value < out.back().value;
            if (more_extreme) out.back() = e;
        } else {
            out.push_back(e);
        }
    }
    return out;
}

std::vector<std::size_t> detect_turning_points(const std::vector<Extremum>& extrema, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("turning ratio must lie in (0, 1)");
    std::vector<std::size_t> out;
    // The last extremum only swings from the trace's end level on its trailing
    // side, so its prominence is about half an interior one. Never mark it.
    for (std::size_t i = 1; i + 1 < extrema.size(); ++i)
        if (extrema[i].prominence < ratio * extrema[i - 1].prominence) out.push_back(i);
    return out;
}

double azimuth_change(const std::vector<Extremum>& extrema, const std::vector<std::size_t>& turning, double theta_c) {
    if (!(theta_c > 0.0)) throw ConfigError("theta_c must be > 0");
    long counts[2] = {0, 0};
    int cat = 0;
    std::size_t next_turn = 0;
    std::vector<std::size_t> turns(turning);
    std::sort(turns.begin(), turns.end());
    for (std::size_t i = 0; i < extrema.size(); ++i) {
        if (next_turn < turns.size() && turns[next_turn] == i) {
            cat ^= 1;
            ++next_turn;
            continue;
        }
        ++counts[cat];
    }
    return static_cast<double>(std::labs(counts[0] - counts[1])) * theta_c;
}

double noise_floor(const SignalTrace& dhf, const ProminencePolicy& policy) {
    const auto& x = dhf.samples;
    if (x.size() < 3) return 0.0;
    const auto win = std::max<std::size_t>(3, static_cast<std::size_t>(std::llround(policy.background_seconds * dhf.sample_rate)));
    const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(policy.hop_seconds * dhf.sample_rate)));
    double best = std::numeric_limits<double>::infinity();
    const std::size_t last = x.size() > win ? x.size() - win : 0;
    for (std::size_t s = 0; s <= last; s += hop) {
        const std::size_t e = std::min(x.size(), s + win);
        std::vector<double> d(e - s - 1);
        for (std::size_t i = s + 1; i < e; ++i) d[i - s - 1] = x[i] - x[i - 1];
        // differencing white noise doubles its variance
        best = std::min(best, mad_sigma(std::move(d)) / std::sqrt(2.0));
    }
    return best;
}

double min_prominence(const SignalTrace& dhf, const ProminencePolicy& policy) {
    if (policy.fixed > 0.0) return policy.fixed;
    double q99 = 0.0;
    if (!dhf.samples.empty()) {
        std::vector<double> a(dhf.samples.size());
        std::transform(dhf.samples.begin(), dhf.samples.end(), a.begin(), [](double v) { return std::abs(v); });
        auto it = a.begin() + static_cast<std::ptrdiff_t>(std::floor(0.99 * static_cast<double>(a.size() - 1)));
        std::nth_element(a.begin(), it, a.end());
        q99 = *it;
    }
    const double thr = std::max(policy.multiplier * noise_floor(dhf, policy), policy.floor_fraction * q99);
    return std::max(thr, std::numeric_limits<double>::min());
}

std::vector<AzimuthObservation> windowed_azimuth(const SignalTrace& dhf, double period, double theta_c,
                                                 double min_prom, const std::string& sensor_id,
                                                 double turning_ratio) {
    if (!(period >= 2.0 / dhf.sample_rate)) throw ConfigError("estimation period must be at least two samples");
    const auto extrema = detect_extrema(dhf, min_prom);
    const auto turning = detect_turning_points(extrema, turning_ratio);
    std::vector<bool> is_turn(extrema.size(), false);
    for (auto i : turning) is_turn[i] = true;

    const double n_last = static_cast<double>(dhf.size() - 1);
    const auto n_windows = static_cast<std::size_t>(std::floor(n_last / dhf.sample_rate / period + 1e-9));
    const double per = period * dhf.sample_rate;  // samples per window

    std::vector<AzimuthObservation> out;
    out.reserve(n_windows);
    std::size_t j = 0;
    for (std::size_t k = 0; k < n_windows; ++k) {
        const double hi = static_cast<double>(k + 1) * per + 1e-9;
        std::vector<Extremum> in_win;
        std::vector<std::size_t> turns_in;
        // an extremum on a boundary belongs to the earlier window
        while (j < extrema.size() && static_cast<double>(extrema[j].index) <= hi) {
            if (is_turn[j]) turns_in.push_back(in_win.size());
            in_win.push_back(extrema[j]);
            ++j;
        }
        AzimuthObservation obs;
        obs.sensor_id = sensor_id;
        obs.window_start = dhf.t0 + static_cast<double>(k) * period;
        obs.window_end = dhf.t0 + static_cast<double>(k + 1) * period;
        obs.theta = azimuth_change(in_win, turns_in, theta_c);
        obs.n_extrema = static_cast<int>(in_win.size());
        obs.turning_detected = !turns_in.empty();
        out.push_back(obs);
    }
    return out;
}

}  // namespace pirtrack
