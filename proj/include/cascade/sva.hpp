#pragma once
// Structural variation analysis and original-vs-expanded overlays.

#include "cascade/conet.hpp"
#include "cascade/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace cascade::sva {

using conet::CoCitationNetwork;
using conet::ClusterSet;
using conet::EdgeKey;
using conet::LayerClass;

// ---------------------------------------------------------------------------
// Overlay

struct ClassCounts {
    std::size_t original = 0;
    std::size_t expansion_only = 0;
    std::size_t shared = 0;
    bool operator==(const ClassCounts&) const = default;
};

struct OverlayReport {
    std::map<std::string, LayerClass> node_classes;
    std::map<EdgeKey, LayerClass> edge_classes;
    ClassCounts nodes;
    ClassCounts edges;
};

namespace detail {

inline void bump(ClassCounts& c, LayerClass k) {
    switch (k) {
    case LayerClass::original: ++c.original; break;
    case LayerClass::expansion_only: ++c.expansion_only; break;
    case LayerClass::shared: ++c.shared; break;
    }
}

template <class Map, class Out>
void classify(const Map& base, const Map& fore, Out& classes, ClassCounts& counts) {
    for (const auto& [k, v] : base) classes[k] = fore.count(k) ? LayerClass::shared : LayerClass::expansion_only;
    for (const auto& [k, v] : fore)
        if (!base.count(k)) classes[k] = LayerClass::original;
    for (const auto& [k, c] : classes) bump(counts, c);
}

} // namespace detail

// base: network of the expanded set (background); fore: network of the
// original set (foreground).
inline OverlayReport overlay(const CoCitationNetwork& base, const CoCitationNetwork& fore) {
    OverlayReport r;
    detail::classify(base.nodes, fore.nodes, r.node_classes, r.nodes);
    detail::classify(base.edges, fore.edges, r.edge_classes, r.edges);
    return r;
}

// Union of both layers with the overlay classes written into provenance.
// Attributes come from the base layer where an element is present in both.
inline CoCitationNetwork overlay_network(const CoCitationNetwork& base, const CoCitationNetwork& fore,
                                         const OverlayReport& report) {
    CoCitationNetwork out = base;
    for (const auto& [id, n] : fore.nodes) out.nodes.try_emplace(id, n);
    for (const auto& [k, e] : fore.edges) out.edges.try_emplace(k, e);
    out.node_class = report.node_classes;
    out.edge_class = report.edge_classes;
    return out;
}

// ---------------------------------------------------------------------------
// Candidate links

using Pair = std::pair<std::string, std::string>; // first < second

struct CandidateLinks {
    std::vector<Pair> novel;    // both ends are baseline nodes, no baseline edge
    std::vector<Pair> existing; // baseline edge already present
    bool operator==(const CandidateLinks&) const = default;
};

inline CandidateLinks candidate_links(const CitationStore& store, const std::string& article_id,
                                      const CoCitationNetwork& baseline) {
    const Publication& p = store.at(article_id);
    std::vector<std::string> refs;
    for (const auto& r : p.reference_ids)
        if (baseline.nodes.count(r)) refs.push_back(r);
    std::sort(refs.begin(), refs.end());
    refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
    CandidateLinks out;
    for (std::size_t i = 0; i < refs.size(); ++i)
        for (std::size_t j = i + 1; j < refs.size(); ++j) {
            Pair pr{refs[i], refs[j]};
            if (baseline.edges.count({refs[i], refs[j]})) out.existing.push_back(std::move(pr));
            else out.novel.push_back(std::move(pr));
        }
    return out;
}

// ---------------------------------------------------------------------------
// Modularity change with the partition held fixed

// Q(baseline) - Q(baseline + novel links at weight 1), updated from
// per-cluster aggregates instead of rebuilding the graph.
inline double delta_modularity(const CoCitationNetwork& baseline, const ClusterSet& partition,
                               const std::vector<Pair>& novel) {
    if (novel.empty()) return 0.0;
    double m = 0;
    std::map<int, double> internal, degree;
    for (const auto& [k, e] : baseline.edges) {
        int ca = partition.partition.at(k.a);
        int cb = partition.partition.at(k.b);
        double w = static_cast<double>(e.weight);
        m += w;
        degree[ca] += w;
        degree[cb] += w;
        if (ca == cb) internal[ca] += w;
    }
    auto q_of = [](double total, const std::map<int, double>& in, const std::map<int, double>& deg) {
        if (total <= 0) return 0.0;
        double q = 0;
        for (const auto& [c, d] : deg) {
            auto it = in.find(c);
            double e = it == in.end() ? 0.0 : it->second;
            q += e / total - (d / (2 * total)) * (d / (2 * total));
        }
        return q;
    };
    const double before = q_of(m, internal, degree);
    for (const auto& [u, v] : novel) {
        int cu = partition.partition.at(u);
        int cv = partition.partition.at(v);
        m += 1.0;
        degree[cu] += 1.0;
        degree[cv] += 1.0;
        if (cu == cv) internal[cu] += 1.0;
    }
    return before - q_of(m, internal, degree);
}

// ---------------------------------------------------------------------------
// Centrality divergence

inline constexpr double kCentralityEps = 1e-9;

// Brandes betweenness on the unweighted, undirected view; each unordered
// pair of endpoints counted once.
inline std::vector<double> betweenness(const std::vector<std::vector<int>>& adj) {
    const std::size_t n = adj.size();
    std::vector<double> cb(n, 0.0);
    std::vector<int> dist(n);
    std::vector<double> sigma(n), delta(n);
    std::vector<std::vector<int>> preds(n);
    std::vector<int> order;
    for (std::size_t s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        for (auto& p : preds) p.clear();
        order.clear();
        dist[s] = 0;
        sigma[s] = 1.0;
        std::deque<int> queue{static_cast<int>(s)};
        while (!queue.empty()) {
            int v = queue.front();
            queue.pop_front();
            order.push_back(v);
            for (int w : adj[static_cast<std::size_t>(v)]) {
                auto uw = static_cast<std::size_t>(w);
                if (dist[uw] < 0) {
                    dist[uw] = dist[static_cast<std::size_t>(v)] + 1;
                    queue.push_back(w);
                }
                if (dist[uw] == dist[static_cast<std::size_t>(v)] + 1) {
                    sigma[uw] += sigma[static_cast<std::size_t>(v)];
                    preds[uw].push_back(v);
                }
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            auto uw = static_cast<std::size_t>(*it);
            for (int v : preds[uw])
                delta[static_cast<std::size_t>(v)] += sigma[static_cast<std::size_t>(v)] / sigma[uw] * (1.0 + delta[uw]);
            if (uw != s) cb[uw] += delta[uw];
        }
    }
    for (auto& x : cb) x /= 2.0;
    return cb;
}

inline double kl_divergence(const std::vector<double>& after, const std::vector<double>& before,
                            double eps = kCentralityEps) {
    double sp = 0, sq = 0;
    for (std::size_t i = 0; i < after.size(); ++i) {
        sp += after[i] + eps;
        sq += before[i] + eps;
    }
    double d = 0;
    for (std::size_t i = 0; i < after.size(); ++i) {
        double p = (after[i] + eps) / sp;
        double q = (before[i] + eps) / sq;
        d += p * std::log(p / q);
    }
    return std::max(0.0, d);
}

// KL(after || before) over smoothed, normalized betweenness of baseline nodes.
inline double centrality_divergence(const CoCitationNetwork& baseline, const std::vector<Pair>& novel) {
    if (novel.empty()) return 0.0;
    std::map<std::string, int> index;
    for (const auto& [id, n] : baseline.nodes) index.emplace(id, static_cast<int>(index.size()));
    std::vector<std::set<int>> nb(index.size());
    auto link = [&](const std::string& u, const std::string& v) {
        auto iu = index.find(u), iv = index.find(v);
        if (iu == index.end() || iv == index.end())
            throw DataError("novel link " + u + " -- " + v + " leaves the baseline network");
        if (iu->second == iv->second) return;
        nb[static_cast<std::size_t>(iu->second)].insert(iv->second);
        nb[static_cast<std::size_t>(iv->second)].insert(iu->second);
    };
    auto as_adj = [&] {
        std::vector<std::vector<int>> adj(nb.size());
        for (std::size_t i = 0; i < nb.size(); ++i) adj[i].assign(nb[i].begin(), nb[i].end());
        return adj;
    };
    for (const auto& [k, e] : baseline.edges) link(k.a, k.b);
    auto before = betweenness(as_adj());
    for (const auto& [u, v] : novel) link(u, v);
    auto after = betweenness(as_adj());
    return kl_divergence(after, before);
}

// ---------------------------------------------------------------------------
// SVA run

struct SvaCandidate {
    std::string article_id;
    std::vector<Pair> novel_links;
    std::vector<Pair> existing_links;
    double delta_q = 0.0;
    double centrality_divergence = 0.0;
    std::int64_t times_cited = 0;
    bool in_baseline = false; // the article is itself a baseline node
    bool operator==(const SvaCandidate&) const = default;
};

struct SvaReport {
    std::vector<SvaCandidate> ranked; // all candidates, |delta_q| desc then id
    std::size_t top_n = 10;
    std::optional<double> correlation_r; // needs >= 3 candidates with divergence > 0
    std::size_t correlated = 0;

    std::vector<SvaCandidate> top() const {
        return {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(std::min(top_n, ranked.size()))};
    }
    bool operator==(const SvaReport&) const = default;
};

// Product-moment correlation; nullopt when undefined.
inline std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 3) return std::nullopt;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0 || syy <= 0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline SvaReport sva_run(const CitationStore& store, const IdSet& candidates, const CoCitationNetwork& baseline,
                         const ClusterSet& partition, std::size_t top_n = 10) {
    for (const auto& [id, n] : baseline.nodes)
        if (!partition.partition.count(id)) throw DataError("partition does not cover baseline node '" + id + "'");
    SvaReport r;
    r.top_n = top_n;
    for (const auto& id : candidates) {
        SvaCandidate c;
        c.article_id = id;
        auto links = candidate_links(store, id, baseline);
        c.novel_links = std::move(links.novel);
        c.existing_links = std::move(links.existing);
        c.delta_q = delta_modularity(baseline, partition, c.novel_links);
        c.centrality_divergence = centrality_divergence(baseline, c.novel_links);
        c.times_cited = store.at(id).times_cited;
        c.in_baseline = baseline.nodes.count(id) > 0;
        r.ranked.push_back(std::move(c));
    }
    std::sort(r.ranked.begin(), r.ranked.end(), [](const SvaCandidate& a, const SvaCandidate& b) {
        double da = std::abs(a.delta_q), db = std::abs(b.delta_q);
        if (da != db) return da > db;
        return a.article_id < b.article_id;
    });
    std::vector<double> div, cites;
    for (const auto& c : r.ranked)
        if (c.centrality_divergence > 0) {
            div.push_back(c.centrality_divergence);
            cites.push_back(static_cast<double>(c.times_cited));
        }
    r.correlated = div.size();
    r.correlation_r = pearson(div, cites);
    return r;
}

} // namespace cascade::sva
