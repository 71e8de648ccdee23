#pragma once
// In-process composition of expand -> net -> cluster -> export. The CLI
// stages do the same work through files and must produce identical output.

#include "cascade/conet.hpp"
#include "cascade/expansion.hpp"
#include "cascade/io.hpp"

#include <algorithm>
#include <optional>

namespace cascade::pipeline {

inline constexpr int kDefaultSliceLength = 1;
inline constexpr std::size_t kDefaultNodeCap = 50;

// Slices spanning the citers' publication years.
inline conet::SlicePlan plan_for(const CitationStore& store, const IdSet& citers, int slice_length = kDefaultSliceLength,
                                 std::optional<std::size_t> node_cap = kDefaultNodeCap) {
    std::optional<int> lo, hi;
    for (const auto& id : citers) {
        const Publication& p = store.at(id);
        if (!p.year) continue;
        lo = lo ? std::min(*lo, *p.year) : *p.year;
        hi = hi ? std::max(*hi, *p.year) : *p.year;
    }
    if (!lo) throw DataError("no citer with a publication year");
    return {*lo, *hi, slice_length, node_cap};
}

struct NetworkOptions {
    int slice_length = kDefaultSliceLength;
    std::optional<std::size_t> node_cap = kDefaultNodeCap;
    std::optional<int> start_year;
    std::optional<int> end_year;
    bool largest_component = true;
};

inline conet::CoCitationNetwork network_for(const CitationStore& store, const IdSet& citers, const NetworkOptions& o) {
    auto plan = plan_for(store, citers, o.slice_length, o.node_cap);
    if (o.start_year) plan.start_year = *o.start_year;
    if (o.end_year) plan.end_year = *o.end_year;
    auto net = conet::build(store, citers, plan);
    if (o.largest_component) net = conet::largest_component(net).first;
    return net;
}

inline conet::ClusterSet clusters_for(const conet::CoCitationNetwork& net, const CitationStore& store, const IdSet& citers) {
    return conet::label_clusters(conet::cluster(net), net, store, citers);
}

struct Result {
    expand::ExpansionTrace trace;
    conet::CoCitationNetwork network;
    conet::ClusterSet clusters;
};

inline Result run(const CitationStore& store, const IdSet& seeds, const expand::ExpansionSpec& spec,
                  const NetworkOptions& net_opts = {}) {
    Result r;
    r.trace = expand::run(store, seeds, spec);
    IdSet citers = r.trace.all_ids();
    r.network = network_for(store, citers, net_opts);
    r.clusters = clusters_for(r.network, store, citers);
    return r;
}

} // namespace cascade::pipeline
