#pragma once
// On-disk artifacts (versioned JSON) and network exports (GraphML, DOT, JSON).

#include "cascade/conet.hpp"
#include "cascade/expansion.hpp"
#include "cascade/sva.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

namespace cascade::io {

inline constexpr int kSchemaVersion = 1;

inline Json envelope(std::string_view kind) {
    Json j = Json::object();
    j["schema_version"] = kSchemaVersion;
    j["kind"] = std::string(kind);
    return j;
}

inline void check_envelope(const Json& j, std::string_view kind, const std::string& origin) {
    if (!j.is_object() || !j.contains("schema_version") || !j.contains("kind"))
        throw DataError(origin + ": not a cascade artifact");
    if (j.at("schema_version") != kSchemaVersion)
        throw DataError(origin + ": schema version " + j.at("schema_version").dump() + " (expected " +
                        std::to_string(kSchemaVersion) + ")");
    if (j.at("kind") != kind)
        throw DataError(origin + ": artifact kind " + j.at("kind").dump() + " (expected \"" + std::string(kind) + "\")");
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw DataError("'" + path + "' is not valid JSON: " + e.what());
    }
}

inline Json load_artifact(const std::string& path, std::string_view kind) {
    Json j = read_json_file(path);
    check_envelope(j, kind, path);
    return j;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << text;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// Shortest round-trip decimal form.
inline std::string number(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, p);
}

// ---------------------------------------------------------------------------
// Enumerations

inline std::string_view to_string(expand::StopReason r) {
    using expand::StopReason;
    switch (r) {
    case StopReason::steps_exhausted: return "steps_exhausted";
    case StopReason::empty_frontier: return "empty_frontier";
    case StopReason::year_floor: return "year_floor";
    case StopReason::h_index_ceiling: return "h_index_ceiling";
    case StopReason::population_cap: return "population_cap";
    }
    return "unknown";
}

inline expand::StopReason stop_reason_from(std::string_view s) {
    using expand::StopReason;
    for (auto r : {StopReason::steps_exhausted, StopReason::empty_frontier, StopReason::year_floor,
                   StopReason::h_index_ceiling, StopReason::population_cap})
        if (to_string(r) == s) return r;
    throw DataError("unknown stop_reason '" + std::string(s) + "'");
}

inline std::string_view to_string(expand::SelectionKey k) {
    using expand::SelectionKey;
    switch (k) {
    case SelectionKey::times_cited: return "times_cited";
    case SelectionKey::altmetric: return "altmetric";
    case SelectionKey::rcr: return "rcr";
    case SelectionKey::field_percentile: return "field_percentile";
    }
    return "unknown";
}

inline conet::LayerClass layer_class_from(std::string_view s) {
    using conet::LayerClass;
    for (auto c : {LayerClass::original, LayerClass::expansion_only, LayerClass::shared})
        if (conet::to_string(c) == s) return c;
    throw DataError("unknown layer class '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Id sets

inline Json idset_to_json(const IdSet& ids) {
    Json j = envelope("idset");
    j["ids"] = std::vector<std::string>(ids.begin(), ids.end());
    return j;
}

// ---------------------------------------------------------------------------
// Expansion trace

inline Json to_json(const expand::ExpansionSpec& s) {
    Json j = Json::object();
    j["direction"] = s.direction == expand::Direction::forward ? "forward" : "backward";
    j["max_steps"] = s.max_steps;
    j["per_article_limit"] = s.per_article_limit;
    j["key"] = std::string(to_string(s.key));
    j["min_year"] = s.min_year ? Json(*s.min_year) : Json(nullptr);
    j["h_index_ceiling"] = s.h_index_ceiling ? Json(*s.h_index_ceiling) : Json(nullptr);
    j["max_population"] = s.max_population ? Json(*s.max_population) : Json(nullptr);
    return j;
}

inline Json to_json(const expand::ExpansionTrace& t, const Json& spec = nullptr) {
    Json j = envelope("trace");
    if (!spec.is_null()) j["spec"] = spec;
    j["generations"] = t.generations;
    Json fs = Json::object();
    for (const auto& [id, g] : t.first_seen) fs[id] = g;
    j["first_seen"] = std::move(fs);
    Json edges = Json::array();
    for (const auto& e : t.edges) edges.push_back(Json{{"citing", e.citing}, {"cited", e.cited}, {"generation", e.generation}});
    j["edges"] = std::move(edges);
    j["stop_reason"] = std::string(to_string(t.stop_reason));
    j["complete"] = t.complete;
    if (!t.complete) j["error"] = t.error;
    return j;
}

inline expand::ExpansionTrace trace_from_json(const Json& j, const std::string& origin = "trace") {
    check_envelope(j, "trace", origin);
    try {
        expand::ExpansionTrace t;
        t.generations = j.at("generations").get<std::vector<std::vector<std::string>>>();
        for (const auto& [id, g] : j.at("first_seen").items()) t.first_seen[id] = g.get<int>();
        for (const auto& e : j.at("edges"))
            t.edges.push_back({e.at("citing").get<std::string>(), e.at("cited").get<std::string>(), e.at("generation").get<int>()});
        t.stop_reason = stop_reason_from(j.at("stop_reason").get<std::string>());
        t.complete = j.value("complete", true);
        t.error = j.value("error", std::string());
        return t;
    } catch (const Json::exception& e) {
        throw DataError(origin + ": malformed trace: " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Network

namespace detail {

inline Json year_map(const std::map<int, std::int64_t>& m) {
    Json j = Json::object();
    for (const auto& [y, c] : m) j[std::to_string(y)] = c;
    return j;
}

inline std::map<int, std::int64_t> year_map_from(const Json& j) {
    std::map<int, std::int64_t> m;
    for (const auto& [k, v] : j.items()) m[std::stoi(k)] = v.get<std::int64_t>();
    return m;
}

} // namespace detail

inline Json to_json(const conet::SlicePlan& p) {
    return Json{{"start_year", p.start_year},
                {"end_year", p.end_year},
                {"slice_length", p.slice_length},
                {"node_cap", p.node_cap ? Json(*p.node_cap) : Json(nullptr)}};
}

inline Json to_json(const conet::CoCitationNetwork& net, const conet::ClusterSet* clusters = nullptr,
                    const Json& metadata = nullptr) {
    Json j = envelope("network");
    j["plan"] = to_json(net.plan);
    if (!metadata.is_null()) j["metadata"] = metadata;
    Json nodes = Json::array();
    for (const auto& [id, n] : net.nodes) {
        Json o = Json::object();
        o["id"] = id;
        o["year"] = n.year ? Json(*n.year) : Json(nullptr);
        o["times_cited"] = n.times_cited;
        o["citations"] = n.citations;
        o["total_cocitations"] = n.total_cocitations;
        o["first_slice"] = n.first_slice;
        o["yearly"] = detail::year_map(n.yearly);
        o["burst_strength"] = n.burst_strength;
        if (auto it = net.node_class.find(id); it != net.node_class.end()) o["class"] = std::string(conet::to_string(it->second));
        if (clusters)
            if (auto it = clusters->partition.find(id); it != clusters->partition.end()) o["cluster"] = it->second;
        nodes.push_back(std::move(o));
    }
    j["nodes"] = std::move(nodes);
    Json edges = Json::array();
    for (const auto& [k, e] : net.edges) {
        Json o = Json::object();
        o["source"] = k.a;
        o["target"] = k.b;
        o["weight"] = e.weight;
        o["first_slice"] = e.first_slice;
        o["per_slice"] = detail::year_map(e.per_slice);
        if (auto it = net.edge_class.find(k); it != net.edge_class.end()) o["class"] = std::string(conet::to_string(it->second));
        edges.push_back(std::move(o));
    }
    j["edges"] = std::move(edges);
    if (clusters) j["modularity"] = clusters->modularity;
    return j;
}

inline conet::CoCitationNetwork network_from_json(const Json& j, const std::string& origin = "network") {
    check_envelope(j, "network", origin);
    try {
        conet::CoCitationNetwork net;
        const Json& p = j.at("plan");
        net.plan.start_year = p.at("start_year").get<int>();
        net.plan.end_year = p.at("end_year").get<int>();
        net.plan.slice_length = p.at("slice_length").get<int>();
        net.plan.node_cap = p.at("node_cap").is_null() ? std::nullopt : std::optional<std::size_t>(p.at("node_cap").get<std::size_t>());
        for (const auto& o : j.at("nodes")) {
            conet::NodeInfo n;
            if (!o.at("year").is_null()) n.year = o.at("year").get<int>();
            n.times_cited = o.at("times_cited").get<std::int64_t>();
            n.citations = o.at("citations").get<std::int64_t>();
            n.total_cocitations = o.at("total_cocitations").get<std::int64_t>();
            n.first_slice = o.at("first_slice").get<int>();
            n.yearly = detail::year_map_from(o.at("yearly"));
            n.burst_strength = o.at("burst_strength").get<double>();
            std::string id = o.at("id").get<std::string>();
            if (o.contains("class")) net.node_class[id] = layer_class_from(o.at("class").get<std::string>());
            net.nodes.emplace(std::move(id), std::move(n));
        }
        for (const auto& o : j.at("edges")) {
            auto key = conet::EdgeKey::of(o.at("source").get<std::string>(), o.at("target").get<std::string>());
            if (!net.nodes.count(key.a) || !net.nodes.count(key.b)) throw DataError(origin + ": edge endpoint is not a node");
            conet::EdgeInfo e;
            e.weight = o.at("weight").get<std::int64_t>();
            e.first_slice = o.at("first_slice").get<int>();
            e.per_slice = detail::year_map_from(o.at("per_slice"));
            if (o.contains("class")) net.edge_class[key] = layer_class_from(o.at("class").get<std::string>());
            net.edges.emplace(std::move(key), std::move(e));
        }
        return net;
    } catch (const Json::exception& e) {
        throw DataError(origin + ": malformed network: " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Clusters

inline Json to_json(const conet::ClusterSet& c) {
    Json j = envelope("clusters");
    j["modularity"] = c.modularity;
    j["cluster_count"] = c.cluster_count();
    Json part = Json::object();
    for (const auto& [id, k] : c.partition) part[id] = k;
    j["partition"] = std::move(part);
    Json labels = Json::object();
    for (const auto& [k, terms] : c.labels) labels[std::to_string(k)] = terms;
    j["labels"] = std::move(labels);
    return j;
}

inline conet::ClusterSet clusters_from_json(const Json& j, const std::string& origin = "clusters") {
    check_envelope(j, "clusters", origin);
    try {
        conet::ClusterSet c;
        c.modularity = j.at("modularity").get<double>();
        for (const auto& [id, k] : j.at("partition").items()) c.partition[id] = k.get<int>();
        for (const auto& [k, terms] : j.at("labels").items()) c.labels[std::stoi(k)] = terms.get<std::vector<std::string>>();
        return c;
    } catch (const Json::exception& e) {
        throw DataError(origin + ": malformed clusters: " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Overlay and SVA reports

inline Json to_json(const sva::ClassCounts& c) {
    return Json{{"original", c.original}, {"expansion_only", c.expansion_only}, {"shared", c.shared}};
}

inline Json to_json(const sva::OverlayReport& r) {
    Json j = envelope("overlay");
    j["node_counts"] = to_json(r.nodes);
    j["edge_counts"] = to_json(r.edges);
    Json nodes = Json::object();
    for (const auto& [id, c] : r.node_classes) nodes[id] = std::string(conet::to_string(c));
    j["nodes"] = std::move(nodes);
    Json edges = Json::array();
    for (const auto& [k, c] : r.edge_classes)
        edges.push_back(Json{{"source", k.a}, {"target", k.b}, {"class", std::string(conet::to_string(c))}});
    j["edges"] = std::move(edges);
    return j;
}

inline Json pairs_json(const std::vector<sva::Pair>& ps) {
    Json a = Json::array();
    for (const auto& [u, v] : ps) a.push_back(Json::array({u, v}));
    return a;
}

inline Json to_json(const sva::SvaReport& r) {
    Json j = envelope("sva");
    Json top = Json::array();
    for (const auto& c : r.top()) {
        Json o = Json::object();
        o["id"] = c.article_id;
        o["delta_q"] = c.delta_q;
        o["divergence"] = c.centrality_divergence;
        o["times_cited"] = c.times_cited;
        o["in_baseline"] = c.in_baseline;
        o["novel"] = pairs_json(c.novel_links);
        o["existing"] = pairs_json(c.existing_links);
        top.push_back(std::move(o));
    }
    j["top"] = std::move(top);
    j["candidates"] = r.ranked.size();
    j["correlated"] = r.correlated;
    j["correlation_r"] = r.correlation_r ? Json(*r.correlation_r) : Json(nullptr);
    return j;
}

// ---------------------------------------------------------------------------
// Exports

enum class ExportFormat { graphml, dot, json };

inline ExportFormat export_format_from(std::string_view s) {
    if (s == "graphml") return ExportFormat::graphml;
    if (s == "dot") return ExportFormat::dot;
    if (s == "json") return ExportFormat::json;
    throw UsageError("unknown export format '" + std::string(s) + "' (graphml, dot, json)");
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

inline std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

// Slice ordinal of the first appearance, for year-coloured rendering.
inline int color_index(const conet::SlicePlan& plan, int first_slice) {
    return (first_slice - plan.start_year) / plan.slice_length;
}

} // namespace detail

inline std::string to_graphml(const conet::CoCitationNetwork& net, const conet::ClusterSet* clusters = nullptr) {
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" "
          "xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" "
          "xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns "
          "http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n";
    const char* node_keys[][2] = {{"year", "int"},     {"times_cited", "long"}, {"citations", "long"},
                                  {"cluster", "int"},  {"burst", "double"},     {"overlay", "string"},
                                  {"color_index", "int"}};
    for (const auto& k : node_keys)
        os << "  <key id=\"n_" << k[0] << "\" for=\"node\" attr.name=\"" << k[0] << "\" attr.type=\"" << k[1] << "\"/>\n";
    const char* edge_keys[][2] = {{"weight", "long"}, {"first_slice", "int"}, {"provenance", "string"}};
    for (const auto& k : edge_keys)
        os << "  <key id=\"e_" << k[0] << "\" for=\"edge\" attr.name=\"" << k[0] << "\" attr.type=\"" << k[1] << "\"/>\n";
    os << "  <graph id=\"cocitation\" edgedefault=\"undirected\">\n";
    for (const auto& [id, n] : net.nodes) {
        os << "    <node id=\"" << detail::xml_escape(id) << "\">\n";
        if (n.year) os << "      <data key=\"n_year\">" << *n.year << "</data>\n";
        os << "      <data key=\"n_times_cited\">" << n.times_cited << "</data>\n";
        os << "      <data key=\"n_citations\">" << n.citations << "</data>\n";
        if (clusters)
            if (auto it = clusters->partition.find(id); it != clusters->partition.end())
                os << "      <data key=\"n_cluster\">" << it->second << "</data>\n";
        os << "      <data key=\"n_burst\">" << number(n.burst_strength) << "</data>\n";
        if (auto it = net.node_class.find(id); it != net.node_class.end())
            os << "      <data key=\"n_overlay\">" << conet::to_string(it->second) << "</data>\n";
        os << "      <data key=\"n_color_index\">" << detail::color_index(net.plan, n.first_slice) << "</data>\n";
        os << "    </node>\n";
    }
    for (const auto& [k, e] : net.edges) {
        os << "    <edge source=\"" << detail::xml_escape(k.a) << "\" target=\"" << detail::xml_escape(k.b) << "\">\n";
        os << "      <data key=\"e_weight\">" << e.weight << "</data>\n";
        os << "      <data key=\"e_first_slice\">" << e.first_slice << "</data>\n";
        if (auto it = net.edge_class.find(k); it != net.edge_class.end())
            os << "      <data key=\"e_provenance\">" << conet::to_string(it->second) << "</data>\n";
        os << "    </edge>\n";
    }
    os << "  </graph>\n</graphml>\n";
    return os.str();
}

// Links only in the expanded layer are dashed; everything else solid.
inline std::string to_dot(const conet::CoCitationNetwork& net, const conet::ClusterSet* clusters = nullptr) {
    std::ostringstream os;
    os << "graph cocitation {\n";
    for (const auto& [id, n] : net.nodes) {
        os << "  " << detail::dot_quote(id) << " [";
        if (n.year) os << "year=" << *n.year << ", ";
        os << "times_cited=" << n.times_cited;
        if (clusters)
            if (auto it = clusters->partition.find(id); it != clusters->partition.end()) os << ", cluster=" << it->second;
        os << ", burst=" << number(n.burst_strength);
        if (auto it = net.node_class.find(id); it != net.node_class.end()) os << ", overlay=" << conet::to_string(it->second);
        os << ", color_index=" << detail::color_index(net.plan, n.first_slice) << "];\n";
    }
    for (const auto& [k, e] : net.edges) {
        auto it = net.edge_class.find(k);
        bool dashed = it != net.edge_class.end() && it->second == conet::LayerClass::expansion_only;
        os << "  " << detail::dot_quote(k.a) << " -- " << detail::dot_quote(k.b) << " [weight=" << e.weight
           << ", first_slice=" << e.first_slice;
        if (it != net.edge_class.end()) os << ", provenance=" << conet::to_string(it->second);
        os << ", style=" << (dashed ? "dashed" : "solid") << "];\n";
    }
    os << "}\n";
    return os.str();
}

// Baseline links in grey; links of the top candidates drawn over them, novel
// ones dashed red and pre-existing ones solid purple.
inline std::string sva_to_dot(const conet::CoCitationNetwork& baseline, const sva::SvaReport& report) {
    std::ostringstream os;
    os << "graph sva {\n";
    std::set<std::string> candidates;
    for (const auto& c : report.top()) candidates.insert(c.article_id);
    for (const auto& [id, n] : baseline.nodes) {
        os << "  " << detail::dot_quote(id);
        if (candidates.count(id)) os << " [shape=star]";
        os << ";\n";
    }
    for (const auto& [k, e] : baseline.edges)
        os << "  " << detail::dot_quote(k.a) << " -- " << detail::dot_quote(k.b) << " [color=gray, weight=" << e.weight << "];\n";
    for (const auto& c : report.top()) {
        for (const auto& [u, v] : c.novel_links)
            os << "  " << detail::dot_quote(u) << " -- " << detail::dot_quote(v) << " [style=dashed, color=red, candidate="
               << detail::dot_quote(c.article_id) << "];\n";
        for (const auto& [u, v] : c.existing_links)
            os << "  " << detail::dot_quote(u) << " -- " << detail::dot_quote(v) << " [style=solid, color=purple, candidate="
               << detail::dot_quote(c.article_id) << "];\n";
    }
    os << "}\n";
    return os.str();
}

inline std::string export_network(const conet::CoCitationNetwork& net, const conet::ClusterSet* clusters,
                                   ExportFormat fmt) {
    switch (fmt) {
    case ExportFormat::graphml: return to_graphml(net, clusters);
    case ExportFormat::dot: return to_dot(net, clusters);
    case ExportFormat::json: return dump(to_json(net, clusters));
    }
    return {};
}

} // namespace cascade::io
