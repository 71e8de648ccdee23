#pragma once
// Time-sliced document co-citation networks.

#include "cascade/corpus.hpp"
#include "cascade/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cascade::conet {

enum class LayerClass { original, expansion_only, shared };

inline std::string_view to_string(LayerClass c) {
    switch (c) {
    case LayerClass::original: return "original";
    case LayerClass::expansion_only: return "expansion_only";
    case LayerClass::shared: return "shared";
    }
    return "unknown";
}

struct SlicePlan {
    int start_year = 0;
    int end_year = 0;
    int slice_length = 1;
    std::optional<std::size_t> node_cap = 50; // nullopt disables per-slice selection

    void check() const {
        if (start_year > end_year) throw UsageError("slice plan: start_year > end_year");
        if (slice_length < 1) throw UsageError("slice plan: slice_length must be >= 1");
        if (node_cap && *node_cap < 1) throw UsageError("slice plan: node cap must be >= 1");
    }
    int slice_count() const { return (end_year - start_year) / slice_length + 1; }
    int slice_index(int year) const { return (year - start_year) / slice_length; }
    int slice_start(int index) const { return start_year + index * slice_length; }
    bool covers(int year) const { return year >= start_year && year <= end_year; }

    bool operator==(const SlicePlan&) const = default;
};

// Unordered pair with a < b.
struct EdgeKey {
    std::string a;
    std::string b;

    static EdgeKey of(std::string x, std::string y) {
        if (y < x) std::swap(x, y);
        return {std::move(x), std::move(y)};
    }
    auto operator<=>(const EdgeKey&) const = default;
    bool operator==(const EdgeKey&) const = default;
};

struct NodeInfo {
    std::optional<int> year;           // publication year when the reference is in the corpus
    std::int64_t times_cited = 0;      // global count from the record (0 for stubs)
    std::int64_t citations = 0;        // citations from the network's citers in selected slices
    std::int64_t total_cocitations = 0; // weighted degree
    int first_slice = 0;
    std::map<int, std::int64_t> yearly; // citing year -> citations
    double burst_strength = 0.0;
    bool operator==(const NodeInfo&) const = default;
};

struct EdgeInfo {
    std::int64_t weight = 0;
    std::map<int, std::int64_t> per_slice; // slice start year -> weight
    int first_slice = 0;
    bool operator==(const EdgeInfo&) const = default;
};

struct CoCitationNetwork {
    SlicePlan plan;
    std::map<std::string, NodeInfo> nodes;
    std::map<EdgeKey, EdgeInfo> edges;
    std::map<std::string, LayerClass> node_class;
    std::map<EdgeKey, LayerClass> edge_class;

    bool empty() const { return nodes.empty(); }
    bool operator==(const CoCitationNetwork&) const = default;
};

struct ClusterSet {
    std::map<std::string, int> partition;
    double modularity = 0.0;
    std::map<int, std::vector<std::string>> labels;

    std::size_t cluster_count() const {
        std::set<int> ids;
        for (const auto& [n, c] : partition) ids.insert(c);
        return ids.size();
    }
    bool operator==(const ClusterSet&) const = default;
};

// ---------------------------------------------------------------------------
// Build

inline void finalize(CoCitationNetwork& net, const metrics::BurstParams& burst = {}) {
    for (auto& [id, n] : net.nodes) n.total_cocitations = 0;
    for (auto& [key, e] : net.edges) {
        e.weight = 0;
        for (const auto& [slice, w] : e.per_slice) e.weight += w;
        e.first_slice = e.per_slice.empty() ? 0 : e.per_slice.begin()->first;
        net.nodes[key.a].total_cocitations += e.weight;
        net.nodes[key.b].total_cocitations += e.weight;
    }
    const int span = net.plan.end_year - net.plan.start_year + 1;
    for (auto& [id, n] : net.nodes) {
        n.burst_strength = 0.0;
        if (n.yearly.empty()) continue;
        std::vector<std::int64_t> series(static_cast<std::size_t>(span), 0);
        for (const auto& [y, c] : n.yearly)
            if (net.plan.covers(y)) series[static_cast<std::size_t>(y - net.plan.start_year)] += c;
        for (const auto& b : metrics::burst_intervals(series, net.plan.start_year, burst))
            n.burst_strength = std::max(n.burst_strength, b.strength);
    }
}

inline CoCitationNetwork build(const CitationStore& store, const IdSet& citers, const SlicePlan& plan) {
    plan.check();
    CoCitationNetwork net;
    net.plan = plan;

    std::map<int, std::vector<const Publication*>> by_slice;
    for (const auto& id : citers) {
        const Publication& p = store.at(id);
        if (!p.year) throw DataError("citer '" + id + "' has no year");
        if (!plan.covers(*p.year)) continue;
        by_slice[plan.slice_index(*p.year)].push_back(&p);
    }

    for (const auto& [slice, members] : by_slice) {
        const int slice_start = plan.slice_start(slice);
        std::map<std::string, std::int64_t> freq;
        for (const Publication* p : members)
            for (const auto& r : p->reference_ids) ++freq[r];

        std::set<std::string> selected;
        if (plan.node_cap && freq.size() > *plan.node_cap) {
            std::vector<std::pair<std::int64_t, std::string>> ranked;
            for (const auto& [r, f] : freq) ranked.emplace_back(f, r);
            std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
                return x.first != y.first ? x.first > y.first : x.second < y.second;
            });
            for (std::size_t i = 0; i < *plan.node_cap; ++i) selected.insert(ranked[i].second);
        } else {
            for (const auto& [r, f] : freq) selected.insert(r);
        }

        for (const auto& r : selected) {
            auto [it, fresh] = net.nodes.try_emplace(r);
            NodeInfo& n = it->second;
            if (fresh) {
                n.first_slice = slice_start;
                if (const Publication* rp = store.find(r)) {
                    n.year = rp->year;
                    n.times_cited = rp->times_cited;
                }
            }
            n.citations += freq[r];
        }

        for (const Publication* p : members) {
            std::vector<std::string> refs;
            for (const auto& r : p->reference_ids)
                if (selected.count(r)) refs.push_back(r);
            std::sort(refs.begin(), refs.end());
            for (const auto& r : refs) ++net.nodes[r].yearly[*p->year];
            for (std::size_t i = 0; i < refs.size(); ++i)
                for (std::size_t j = i + 1; j < refs.size(); ++j) ++net.edges[{refs[i], refs[j]}].per_slice[slice_start];
        }
    }
    finalize(net);
    return net;
}

// Cosine-normalized link strength: w / sqrt(c_u * c_v).
inline std::map<EdgeKey, double> cosine_strength(const CoCitationNetwork& net) {
    std::map<EdgeKey, double> out;
    for (const auto& [key, e] : net.edges) {
        double cu = static_cast<double>(net.nodes.at(key.a).citations);
        double cv = static_cast<double>(net.nodes.at(key.b).citations);
        out[key] = (cu > 0 && cv > 0) ? static_cast<double>(e.weight) / std::sqrt(cu * cv) : 0.0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Components

inline CoCitationNetwork induced(const CoCitationNetwork& net, const std::set<std::string>& keep) {
    CoCitationNetwork sub;
    sub.plan = net.plan;
    for (const auto& id : keep) sub.nodes.emplace(id, net.nodes.at(id));
    for (const auto& [k, e] : net.edges)
        if (keep.count(k.a) && keep.count(k.b)) sub.edges.emplace(k, e);
    for (const auto& [id, c] : net.node_class)
        if (keep.count(id)) sub.node_class.emplace(id, c);
    for (const auto& [k, c] : net.edge_class)
        if (keep.count(k.a) && keep.count(k.b)) sub.edge_class.emplace(k, c);
    return sub;
}

inline std::map<std::string, std::vector<std::string>> adjacency(const CoCitationNetwork& net) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& [id, n] : net.nodes) adj[id];
    for (const auto& [k, e] : net.edges) {
        adj[k.a].push_back(k.b);
        adj[k.b].push_back(k.a);
    }
    return adj;
}

// Largest component (ties: the one holding the smallest id) and its node share.
inline std::pair<CoCitationNetwork, double> largest_component(const CoCitationNetwork& net) {
    if (net.empty()) return {CoCitationNetwork{net.plan, {}, {}, {}, {}}, 0.0};
    auto adj = adjacency(net);
    std::set<std::string> visited;
    std::set<std::string> best;
    for (const auto& [start, nb] : adj) {
        if (visited.count(start)) continue;
        std::set<std::string> comp{start};
        std::deque<std::string> queue{start};
        visited.insert(start);
        while (!queue.empty()) {
            std::string u = std::move(queue.front());
            queue.pop_front();
            for (const auto& v : adj[u])
                if (visited.insert(v).second) {
                    comp.insert(v);
                    queue.push_back(v);
                }
        }
        // Components are discovered in order of their smallest id.
        if (comp.size() > best.size()) best = std::move(comp);
    }
    double fraction = static_cast<double>(best.size()) / static_cast<double>(net.nodes.size());
    return {induced(net, best), fraction};
}

// ---------------------------------------------------------------------------
// Modularity

struct WeightedLink {
    std::string u;
    std::string v;
    double weight = 1.0;
};

// Q = sum_c (e_c / m - (d_c / 2m)^2); 0 when the graph has no weight.
inline double modularity(const std::vector<WeightedLink>& links, const std::map<std::string, int>& partition) {
    double m = 0;
    std::map<int, double> internal, degree;
    for (const auto& l : links) {
        int cu = partition.at(l.u);
        int cv = partition.at(l.v);
        m += l.weight;
        degree[cu] += l.weight;
        degree[cv] += l.weight;
        if (cu == cv) internal[cu] += l.weight;
    }
    if (m <= 0) return 0.0;
    double q = 0;
    for (const auto& [c, d] : degree) {
        auto it = internal.find(c);
        double e = it == internal.end() ? 0.0 : it->second;
        q += e / m - (d / (2 * m)) * (d / (2 * m));
    }
    return q;
}

inline std::vector<WeightedLink> weighted_links(const CoCitationNetwork& net) {
    std::vector<WeightedLink> out;
    out.reserve(net.edges.size());
    for (const auto& [k, e] : net.edges) out.push_back({k.a, k.b, static_cast<double>(e.weight)});
    return out;
}

inline double modularity(const CoCitationNetwork& net, const std::map<std::string, int>& partition) {
    return modularity(weighted_links(net), partition);
}

namespace detail {

struct LevelGraph {
    std::vector<std::vector<std::pair<int, double>>> adj; // no self loops
    std::vector<double> degree;                           // includes internal weight
    double two_m = 0;
};

// One local-moving phase; returns the community of each node, renumbered
// densely in order of first appearance.
inline std::vector<int> local_moving(const LevelGraph& g, bool& any_move) {
    const int n = static_cast<int>(g.adj.size());
    std::vector<int> comm(static_cast<std::size_t>(n));
    std::vector<double> tot(g.degree);
    for (int i = 0; i < n; ++i) comm[static_cast<std::size_t>(i)] = i;
    std::vector<double> w_to(static_cast<std::size_t>(n), 0.0);
    std::vector<int> touched;
    any_move = false;

    constexpr double kMinGain = 1e-12;
    for (bool moved = true; moved;) {
        moved = false;
        for (int i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const int ci = comm[ui];
            for (const auto& [j, w] : g.adj[ui]) {
                int cj = comm[static_cast<std::size_t>(j)];
                if (w_to[static_cast<std::size_t>(cj)] == 0.0) touched.push_back(cj);
                w_to[static_cast<std::size_t>(cj)] += w;
            }
            const double ki = g.degree[ui];
            tot[static_cast<std::size_t>(ci)] -= ki;
            int best = ci;
            double best_gain = w_to[static_cast<std::size_t>(ci)] - tot[static_cast<std::size_t>(ci)] * ki / g.two_m;
            std::sort(touched.begin(), touched.end());
            touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
            for (int c : touched) {
                double gain = w_to[static_cast<std::size_t>(c)] - tot[static_cast<std::size_t>(c)] * ki / g.two_m;
                if (gain > best_gain + kMinGain) {
                    best = c;
                    best_gain = gain;
                }
            }
            tot[static_cast<std::size_t>(best)] += ki;
            comm[ui] = best;
            if (best != ci) moved = any_move = true;
            for (int c : touched) w_to[static_cast<std::size_t>(c)] = 0.0;
            touched.clear();
        }
    }

    std::map<int, int> dense;
    for (auto& c : comm) {
        auto [it, fresh] = dense.try_emplace(c, static_cast<int>(dense.size()));
        c = it->second;
    }
    return comm;
}

inline LevelGraph aggregate(const LevelGraph& g, const std::vector<int>& comm, int communities) {
    LevelGraph out;
    out.adj.resize(static_cast<std::size_t>(communities));
    out.degree.assign(static_cast<std::size_t>(communities), 0.0);
    out.two_m = g.two_m;
    std::vector<std::map<int, double>> acc(static_cast<std::size_t>(communities));
    for (std::size_t i = 0; i < g.adj.size(); ++i) {
        out.degree[static_cast<std::size_t>(comm[i])] += g.degree[i];
        for (const auto& [j, w] : g.adj[i]) {
            int a = comm[i];
            int b = comm[static_cast<std::size_t>(j)];
            if (a != b) acc[static_cast<std::size_t>(a)][b] += w;
        }
    }
    for (std::size_t c = 0; c < acc.size(); ++c)
        for (const auto& [d, w] : acc[c]) out.adj[c].emplace_back(d, w);
    return out;
}

} // namespace detail

// Louvain-style greedy modularity agglomeration. Deterministic: nodes are
// visited in id order and candidate moves are compared in community order.
inline ClusterSet cluster(const CoCitationNetwork& net) {
    ClusterSet out;
    if (net.empty()) return out;

    std::vector<std::string> ids;
    std::map<std::string, int> index;
    for (const auto& [id, n] : net.nodes) {
        index[id] = static_cast<int>(ids.size());
        ids.push_back(id);
    }
    detail::LevelGraph g;
    g.adj.resize(ids.size());
    g.degree.assign(ids.size(), 0.0);
    for (const auto& [k, e] : net.edges) {
        int a = index.at(k.a), b = index.at(k.b);
        double w = static_cast<double>(e.weight);
        g.adj[static_cast<std::size_t>(a)].emplace_back(b, w);
        g.adj[static_cast<std::size_t>(b)].emplace_back(a, w);
        g.degree[static_cast<std::size_t>(a)] += w;
        g.degree[static_cast<std::size_t>(b)] += w;
        g.two_m += 2 * w;
    }

    std::vector<int> membership(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) membership[i] = static_cast<int>(i);
    if (g.two_m > 0) {
        for (;;) {
            bool moved = false;
            auto comm = detail::local_moving(g, moved);
            if (!moved) break;
            for (auto& m : membership) m = comm[static_cast<std::size_t>(m)];
            int communities = *std::max_element(comm.begin(), comm.end()) + 1;
            g = detail::aggregate(g, comm, communities);
        }
    }

    std::map<int, std::vector<std::string>> groups;
    for (std::size_t i = 0; i < ids.size(); ++i) groups[membership[i]].push_back(ids[i]);
    std::map<std::string, int> raw;
    for (std::size_t i = 0; i < ids.size(); ++i) raw[ids[i]] = membership[i];
    if (modularity(net, raw) < 0.0) {
        // Never worse than the single-cluster partition (Q = 0).
        groups.clear();
        groups[0] = ids;
    }

    std::vector<std::vector<std::string>> ordered;
    for (auto& [c, members] : groups) ordered.push_back(std::move(members));
    std::sort(ordered.begin(), ordered.end(), [](const auto& x, const auto& y) {
        return x.size() != y.size() ? x.size() > y.size() : x.front() < y.front();
    });
    for (std::size_t c = 0; c < ordered.size(); ++c)
        for (const auto& id : ordered[c]) out.partition[id] = static_cast<int>(c);
    out.modularity = modularity(net, out.partition);
    return out;
}

// ---------------------------------------------------------------------------
// Cluster labels from citer titles

namespace detail {

inline const std::set<std::string, std::less<>>& stopwords() {
    static const std::set<std::string, std::less<>> words{
        "a", "about", "above", "across", "after", "again", "against", "all", "also", "among", "an", "and", "any",
        "are", "as", "at", "based", "be", "been", "before", "being", "between", "both", "but", "by", "can", "could",
        "did", "do", "does", "doing", "down", "during", "each", "few", "for", "from", "further", "had", "has",
        "have", "having", "he", "her", "here", "hers", "him", "his", "how", "however", "i", "if", "in", "into",
        "is", "it", "its", "itself", "just", "may", "me", "more", "most", "my", "new", "no", "nor", "not", "of",
        "off", "on", "once", "only", "or", "other", "our", "ours", "out", "over", "own", "same", "she", "should",
        "so", "some", "such", "than", "that", "the", "their", "theirs", "them", "then", "there", "these", "they",
        "this", "those", "through", "to", "too", "toward", "towards", "under", "until", "up", "upon", "using",
        "very", "via", "was", "we", "were", "what", "when", "where", "which", "while", "who", "whom", "why",
        "will", "with", "within", "without", "would", "you", "your", "yours"};
    return words;
}

// Unigrams and adjacent bigrams of content words; a stopword breaks a bigram.
inline std::set<std::string> title_terms(std::string_view title) {
    std::vector<std::vector<std::string>> runs(1);
    std::string tok;
    auto flush = [&] {
        if (tok.empty()) return;
        bool numeric = std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); });
        if (numeric || tok.size() < 2 || stopwords().count(tok)) {
            if (!runs.back().empty()) runs.emplace_back();
        } else {
            runs.back().push_back(tok);
        }
        tok.clear();
    };
    for (char ch : title) {
        auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c >= 0x80) tok.push_back(static_cast<char>(std::tolower(c)));
        else flush();
    }
    flush();
    std::set<std::string> terms;
    for (const auto& run : runs)
        for (std::size_t i = 0; i < run.size(); ++i) {
            terms.insert(run[i]);
            if (i + 1 < run.size()) terms.insert(run[i] + " " + run[i + 1]);
        }
    return terms;
}

inline double xlogx_ratio(double o, double e) { return o > 0 && e > 0 ? o * std::log(o / e) : 0.0; }

// Signed log-likelihood ratio (G^2) of a term's document frequency inside the
// cluster (k1 of n1) against the remaining citers (k2 of n2).
inline double signed_llr(double k1, double n1, double k2, double n2) {
    double n = n1 + n2;
    if (n1 <= 0 || n2 <= 0) return 0.0;
    double k = k1 + k2;
    double g2 = 2.0 * (xlogx_ratio(k1, n1 * k / n) + xlogx_ratio(n1 - k1, n1 * (n - k) / n) +
                       xlogx_ratio(k2, n2 * k / n) + xlogx_ratio(n2 - k2, n2 * (n - k) / n));
    return (k1 / n1 >= k2 / n2) ? g2 : -g2;
}

} // namespace detail

inline constexpr std::size_t kLabelTerms = 3;

// Citers whose reference lists realize at least one within-cluster edge.
inline std::map<int, IdSet> cluster_citers(const ClusterSet& set, const CoCitationNetwork& net,
                                           const CitationStore& store, const IdSet& citers) {
    std::map<int, IdSet> out;
    for (const auto& id : citers) {
        const Publication* p = store.find(id);
        if (!p || !p->year || !net.plan.covers(*p->year)) continue;
        const int slice = net.plan.slice_start(net.plan.slice_index(*p->year));
        std::map<int, std::vector<std::string>> by_cluster;
        for (const auto& r : p->reference_ids) {
            auto it = set.partition.find(r);
            if (it != set.partition.end()) by_cluster[it->second].push_back(r);
        }
        for (auto& [c, refs] : by_cluster) {
            std::sort(refs.begin(), refs.end());
            bool hit = false;
            for (std::size_t i = 0; i < refs.size() && !hit; ++i)
                for (std::size_t j = i + 1; j < refs.size() && !hit; ++j) {
                    auto e = net.edges.find({refs[i], refs[j]});
                    hit = e != net.edges.end() && e->second.per_slice.count(slice);
                }
            if (hit) out[c].insert(id);
        }
    }
    return out;
}

inline ClusterSet label_clusters(ClusterSet set, const CoCitationNetwork& net, const CitationStore& store,
                                 const IdSet& citers) {
    std::map<std::string, std::set<std::string>> terms_of;
    std::map<std::string, double> corpus_df;
    for (const auto& id : citers) {
        const Publication* p = store.find(id);
        if (!p) continue;
        auto terms = detail::title_terms(p->title);
        for (const auto& t : terms) corpus_df[t] += 1.0;
        terms_of.emplace(id, std::move(terms));
    }
    const double corpus_n = static_cast<double>(terms_of.size());

    set.labels.clear();
    std::set<int> clusters;
    for (const auto& [n, c] : set.partition) clusters.insert(c);
    auto members = cluster_citers(set, net, store, citers);
    for (int c : clusters) {
        auto& label = set.labels[c];
        auto it = members.find(c);
        if (it == members.end()) continue;
        std::map<std::string, double> df;
        for (const auto& id : it->second)
            for (const auto& t : terms_of.at(id)) df[t] += 1.0;
        const double n1 = static_cast<double>(it->second.size());

        struct Scored {
            double llr;
            double df;
            std::size_t words;
            std::string term;
        };
        std::vector<Scored> scored;
        for (const auto& [t, k1] : df) {
            double llr = detail::signed_llr(k1, n1, corpus_df[t] - k1, corpus_n - n1);
            scored.push_back({llr, k1, static_cast<std::size_t>(std::count(t.begin(), t.end(), ' ') + 1), t});
        }
        std::sort(scored.begin(), scored.end(), [](const Scored& x, const Scored& y) {
            if (x.llr != y.llr) return x.llr > y.llr;
            if (x.df != y.df) return x.df > y.df;
            if (x.words != y.words) return x.words > y.words;
            return x.term < y.term;
        });
        for (std::size_t i = 0; i < scored.size() && i < kLabelTerms; ++i) label.push_back(scored[i].term);
    }
    return set;
}

// ---------------------------------------------------------------------------
// Frames

struct Frame {
    int year = 0;
    std::vector<EdgeKey> edges;
    bool operator==(const Frame&) const = default;
};

// One frame per slice that carries links; an edge sits in every slice where it has weight.
inline std::vector<Frame> step_frames(const CoCitationNetwork& net) {
    std::map<int, std::vector<EdgeKey>> frames;
    for (const auto& [k, e] : net.edges)
        for (const auto& [slice, w] : e.per_slice)
            if (w > 0) frames[slice].push_back(k);
    std::vector<Frame> out;
    for (auto& [year, edges] : frames) out.push_back({year, std::move(edges)});
    return out;
}

} // namespace cascade::conet
