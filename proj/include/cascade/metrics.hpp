#pragma once
// Set-level bibliometric measures.

#include "cascade/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace cascade::metrics {

// Largest h such that at least h values are >= h.
inline std::int64_t h_index(std::span<const std::int64_t> citations) {
    std::vector<std::int64_t> v(citations.begin(), citations.end());
    std::sort(v.begin(), v.end(), std::greater<>());
    std::int64_t h = 0;
    while (h < static_cast<std::int64_t>(v.size()) && v[static_cast<std::size_t>(h)] >= h + 1) ++h;
    return h;
}

inline constexpr std::array<std::int64_t, 6> kThresholds{1, 10, 100, 1000, 10000, 100000};

struct ThresholdProfile {
    std::size_t set_size = 0;
    std::array<std::int64_t, kThresholds.size()> counts_at{}; // parallel to kThresholds
    std::int64_t h_index = 0;
    bool operator==(const ThresholdProfile&) const = default;
};

inline ThresholdProfile threshold_profile(std::span<const std::int64_t> citations) {
    ThresholdProfile p;
    p.set_size = citations.size();
    for (auto c : citations)
        for (std::size_t i = 0; i < kThresholds.size(); ++i)
            if (c >= kThresholds[i]) ++p.counts_at[i];
    p.h_index = h_index(citations);
    return p;
}

inline ThresholdProfile threshold_profile(const CitationStore& store, const IdSet& ids) {
    std::vector<std::int64_t> cites;
    cites.reserve(ids.size());
    for (const auto& id : ids) cites.push_back(store.at(id).times_cited);
    return threshold_profile(cites);
}

// ---------------------------------------------------------------------------
// Field-and-year normalization

struct NotNormalizable : DataError {
    using DataError::DataError;
};

struct CohortPercentile {
    std::string pub_id;
    corpus::CohortKey cohort;
    double percentile = 0.0;
};

// 100 * mean rank / n, ranks ascending from 1; `sorted` must be ascending.
inline double percentile_in(std::span<const std::int64_t> sorted, std::int64_t value) {
    auto lo = std::lower_bound(sorted.begin(), sorted.end(), value);
    auto hi = std::upper_bound(lo, sorted.end(), value);
    double below = static_cast<double>(lo - sorted.begin());
    double equal = static_cast<double>(hi - lo);
    double mean_rank = below + (equal + 1.0) / 2.0;
    return 100.0 * mean_rank / static_cast<double>(sorted.size());
}

inline CohortPercentile cohort_percentile(const CitationStore& store, const std::string& id) {
    const Publication& p = store.at(id);
    const auto* cohort = store.cohort_of(p);
    if (!cohort) throw NotNormalizable("publication '" + id + "' lacks a field of research or year");
    return {id, {p.primary_field()->code, *p.year}, percentile_in(*cohort, p.times_cited)};
}

struct NormalizeResult {
    IdSet kept;
    std::size_t non_normalizable = 0; // kept without a percentile
};

// Keeps ids at or above `cutoff` within their cohort. Stubs and records
// without FOR/year pass through and are counted.
inline NormalizeResult normalize_filter(const CitationStore& store, const IdSet& ids, double cutoff = 50.0) {
    NormalizeResult r;
    for (const auto& id : ids) {
        const Publication* p = store.find(id);
        if (!p && !store.is_stub(id)) throw DataError("unknown publication id '" + id + "'");
        const auto* cohort = p ? store.cohort_of(*p) : nullptr;
        if (!cohort) {
            ++r.non_normalizable;
            r.kept.insert(id);
            continue;
        }
        if (percentile_in(*cohort, p->times_cited) >= cutoff) r.kept.insert(id);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Burst detection: two-state Poisson rate automaton. Base rate is the series
// mean, burst rate is ratio * mean, entering the burst state costs
// gamma * ln(n) and leaving it is free. The chosen state sequence is the
// lexicographically smallest (base before burst) among minimum-cost ones.

struct BurstInterval {
    int start_year = 0;
    int end_year = 0;
    double strength = 0.0;
    bool operator==(const BurstInterval&) const = default;
};

struct BurstParams {
    double gamma = 1.0;
    double ratio = 2.0;
};

inline constexpr double kBurstTieEps = 1e-9;

struct BurstModel {
    double base_rate = 0;
    double burst_rate = 0;
    double enter_cost = 0;

    // -log Poisson likelihood without the state-independent log(c!) term.
    double emission(int state, std::int64_t count) const {
        double rate = state == 0 ? base_rate : burst_rate;
        return rate - static_cast<double>(count) * std::log(rate);
    }
    double transition(int from, int to) const { return (from == 0 && to == 1) ? enter_cost : 0.0; }
};

inline BurstModel burst_model(std::span<const std::int64_t> series, const BurstParams& params) {
    if (params.ratio <= 1.0) throw UsageError("burst ratio must be > 1");
    if (params.gamma < 0.0) throw UsageError("burst gamma must be >= 0");
    double total = 0;
    for (auto c : series) {
        if (c < 0) throw DataError("burst series holds a negative count");
        total += static_cast<double>(c);
    }
    BurstModel m;
    m.base_rate = total / static_cast<double>(series.size());
    m.burst_rate = params.ratio * m.base_rate;
    m.enter_cost = params.gamma * std::log(static_cast<double>(series.size()));
    return m;
}

// Per-position states (0 base, 1 burst); all zeros for an all-zero series.
inline std::vector<int> burst_states(std::span<const std::int64_t> series, const BurstParams& params = {}) {
    const std::size_t n = series.size();
    std::vector<int> states(n, 0);
    if (n == 0 || std::all_of(series.begin(), series.end(), [](auto c) { return c == 0; })) return states;
    const BurstModel m = burst_model(series, params);

    // togo[t][s]: cheapest cost of positions t..n-1 given state s at t.
    std::vector<std::array<double, 2>> togo(n + 1, {0.0, 0.0});
    for (std::size_t t = n; t-- > 0;) {
        for (int s = 0; s < 2; ++s) {
            double next = 0;
            if (t + 1 < n)
                next = std::min(m.transition(s, 0) + togo[t + 1][0], m.transition(s, 1) + togo[t + 1][1]);
            togo[t][s] = m.emission(s, series[t]) + next;
        }
    }
    int prev = 0;
    for (std::size_t t = 0; t < n; ++t) {
        double stay_base = m.transition(prev, 0) + togo[t][0];
        double go_burst = m.transition(prev, 1) + togo[t][1];
        states[t] = stay_base <= go_burst + kBurstTieEps ? 0 : 1;
        prev = states[t];
    }
    return states;
}

// Maximal burst runs with strength = sum over the run of (base cost - burst cost).
inline std::vector<BurstInterval> burst_intervals(std::span<const std::int64_t> series, int first_year,
                                                  const BurstParams& params = {}) {
    std::vector<BurstInterval> out;
    auto states = burst_states(series, params);
    if (std::find(states.begin(), states.end(), 1) == states.end()) return out;
    const BurstModel m = burst_model(series, params);
    for (std::size_t t = 0; t < states.size();) {
        if (states[t] == 0) {
            ++t;
            continue;
        }
        BurstInterval b;
        b.start_year = first_year + static_cast<int>(t);
        while (t < states.size() && states[t] == 1) {
            b.strength += m.emission(0, series[t]) - m.emission(1, series[t]);
            ++t;
        }
        b.end_year = first_year + static_cast<int>(t) - 1;
        out.push_back(b);
    }
    return out;
}

// Years between the first and last key are filled with zero counts.
inline std::vector<BurstInterval> burst_detect(const std::map<int, std::int64_t>& yearly_counts, double gamma = 1.0,
                                               double ratio = 2.0) {
    if (yearly_counts.empty()) return {};
    int first = yearly_counts.begin()->first;
    int last = yearly_counts.rbegin()->first;
    std::vector<std::int64_t> series(static_cast<std::size_t>(last - first + 1), 0);
    for (const auto& [year, count] : yearly_counts) series[static_cast<std::size_t>(year - first)] = count;
    return burst_intervals(series, first, {gamma, ratio});
}

} // namespace cascade::metrics
