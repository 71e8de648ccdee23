// cascade: command-line front end. Every stage reads and writes files so a
// long run can be checkpointed between stages.
//
// Exit status: 0 success, 1 usage error, 2 data error.

#include "cascade/conet.hpp"
#include "cascade/corpus.hpp"
#include "cascade/dsl.hpp"
#include "cascade/expansion.hpp"
#include "cascade/fetch.hpp"
#include "cascade/http.hpp"
#include "cascade/io.hpp"
#include "cascade/manifest.hpp"
#include "cascade/metrics.hpp"
#include "cascade/pipeline.hpp"
#include "cascade/sva.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <sstream>

namespace {

using namespace cascade;

constexpr const char* kTokenEnv = "CASCADE_DSL_TOKEN";

struct Session {
    manifest::RunManifest manifest;
    std::string manifest_path;

    void input(const std::string& path) { manifest.inputs.push_back(path); }

    // Writes to `path`, or stdout when path is empty or "-".
    void emit(const std::string& path, const std::string& text) {
        if (path.empty() || path == "-") {
            std::cout << text;
            std::cout.flush();
            return;
        }
        io::write_text(path, text);
        manifest.outputs.push_back(path);
    }
};

std::string trim(std::string s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// "a,b,c" | "@file" where file is a trace or idset artifact, or one id per line.
IdSet parse_ids(const std::string& spec, Session& s) {
    if (spec.empty() || spec[0] != '@') {
        auto ids = split(spec, ',');
        return {ids.begin(), ids.end()};
    }
    const std::string path = spec.substr(1);
    std::ifstream in(path);
    if (!in) throw DataError("cannot read id list '" + path + "'");
    s.input(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Json j = Json::parse(text, nullptr, false);
    if (!j.is_discarded() && j.is_object()) {
        if (j.value("kind", "") == "trace") return io::trace_from_json(j, path).all_ids();
        io::check_envelope(j, "idset", path);
        auto ids = j.at("ids").get<std::vector<std::string>>();
        return {ids.begin(), ids.end()};
    }
    IdSet ids;
    for (const auto& line : split(text, '\n'))
        if (line[0] != '#') ids.insert(line);
    return ids;
}

CitationStore load_store(const std::string& path, double max_malformed, Session& s) {
    s.input(path);
    return corpus::ingest_jsonl(path, corpus::IngestOptions{max_malformed});
}

struct SourceOptions {
    std::string source = "live";
    std::string endpoint;
    int page_limit = dsl::kMaxLimit;
    std::size_t max_records = 0;
    int retries = 3;
    int backoff_ms = 250;

    void add_to(CLI::App* app) {
        app->add_option("--source", source, "live | replay:<archive> | record:<archive>");
        app->add_option("--endpoint", endpoint, "DSL endpoint URL (POST)");
        app->add_option("--page-limit", page_limit, "records per page (1..1000)");
        app->add_option("--max-records", max_records, "cap on records per fetch (0 = none)");
        app->add_option("--retries", retries, "attempts per page");
        app->add_option("--backoff-ms", backoff_ms, "initial retry backoff");
    }

    fetch::SourceConfig config(Session& s) const {
        fetch::SourceConfig cfg;
        cfg.endpoint_url = endpoint;
        if (const char* tok = std::getenv(kTokenEnv)) cfg.auth_token = tok;
        cfg.page_limit = page_limit;
        if (max_records > 0) cfg.max_records = max_records;
        cfg.retry = {retries, backoff_ms};
        if (source == "live") {
            cfg.mode = fetch::Mode::live;
        } else if (source.rfind("replay:", 0) == 0) {
            cfg.mode = fetch::Mode::replay;
            cfg.fixture_path = source.substr(7);
            s.input(cfg.fixture_path);
        } else if (source.rfind("record:", 0) == 0) {
            cfg.mode = fetch::Mode::record;
            cfg.fixture_path = source.substr(7);
            s.manifest.outputs.push_back(cfg.fixture_path);
        } else {
            throw UsageError("--source must be live, replay:<file> or record:<file>");
        }
        if (cfg.mode != fetch::Mode::replay && cfg.endpoint_url.empty())
            throw UsageError("--endpoint is required for live and record sources");
        return cfg;
    }
};

std::string read_all(std::istream& in) { return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()}; }

// ---------------------------------------------------------------------------

struct IngestCmd {
    std::string store, out, report;
    double max_malformed = 0.10;

    void add(CLI::App& app, std::function<void()>& run, Session& s) {
        auto* c = app.add_subcommand("ingest", "load a JSONL corpus, validate it and report");
        c->add_option("--store", store, "JSONL corpus")->required();
        c->add_option("--max-malformed", max_malformed, "abort above this fraction of malformed lines");
        c->add_option("--out", out, "write the cleaned corpus as JSONL");
        c->add_option("--report", report, "validation report path (default stdout)");
        c->callback([this, &run, &s] { run = [this, &s] { exec(s); }; });
    }

    void exec(Session& s) {
        auto st = load_store(store, max_malformed, s);
        Json j = io::envelope("ingest_report");
        j["records"] = st.size();
        j["stubs"] = st.stubs().size();
        j["cohorts"] = st.cohorts().size();
        j["quarantined"] = st.quarantined();
        Json bad = Json::array();
        for (const auto& m : st.malformed()) bad.push_back(Json{{"line", m.line}, {"message", m.message}});
        j["malformed"] = std::move(bad);
        Json issues = Json::array();
        for (const auto& i : corpus::validate(st))
            issues.push_back(Json{{"record_id", i.record_id}, {"kind", std::string(corpus::to_string(i.kind))}, {"detail", i.detail}});
        j["issues"] = std::move(issues);
        if (!out.empty()) {
            std::ostringstream os;
            std::vector<Publication> recs;
            for (const auto& [id, p] : st.records()) recs.push_back(p);
            corpus::write_jsonl(os, recs);
            s.emit(out, os.str());
        }
        s.emit(report, io::dump(j));
    }
};

struct QueryCmd {
    std::string dsl_text, store, out;
    double max_malformed = 0.10;
    SourceOptions src;

    void add(CLI::App& app, std::function<void()>& run, Session& s) {
        auto* c = app.add_subcommand("query", "evaluate a DSL query against a corpus or an endpoint");
        c->add_option("--dsl", dsl_text, "query text (default: read stdin)");
        c->add_option("--store", store, "answer from this JSONL corpus");
        c->add_option("--max-malformed", max_malformed, "abort above this fraction of malformed lines");
        c->add_option("--out", out, "result path (default stdout)");
        src.add_to(c);
        c->callback([this, &run, &s] { run = [this, &s] { exec(s); }; });
    }

    void exec(Session& s) {
        if (dsl_text.empty()) dsl_text = read_all(std::cin);
        dsl::Query q = dsl::parse(dsl_text);
        dsl::ResultPage page;
        if (!store.empty()) {
            page = dsl::evaluate(load_store(store, max_malformed, s), q);
        } else {
            auto cfg = src.config(s);
            cfg.page_limit = q.limit;
            auto client = fetch::make_client(cfg);
            page = client.request_page(q, q.skip);
        }
        s.emit(out, io::dump(dsl::to_json(page)));
    }
};

struct ExpandCmd {
    std::string store, seeds, out, fetched_out, direction = "fwd", key = "times_cited";
    int steps = 1;
    std::size_t limit = 10;
    int min_year = 0;
    std::int64_t h_ceiling = 0;
    std::size_t max_pop = 0;
    bool exclude_stubs = false;
    double max_malformed = 0.10;
    SourceOptions src;
    CLI::Option *min_year_opt = nullptr, *h_opt = nullptr, *pop_opt = nullptr;

    void add(CLI::App& app, std::function<void()>& run, Session& s) {
        auto* c = app.add_subcommand("expand", "cascading citation expansion from seed articles");
        c->add_option("--store", store, "JSONL corpus (omit to expand through --source)");
        c->add_option("--seeds", seeds, "ids: a,b,c or @file")->required();
        c->add_option("--direction", direction, "fwd | bwd")->check(CLI::IsMember({"fwd", "bwd", "forward", "backward"}));
        c->add_option("--steps", steps, "maximum number of expansion steps");
        c->add_option("--limit", limit, "articles kept per source article");
        c->add_option("--key", key, "selection key")
            ->check(CLI::IsMember({"times_cited", "altmetric", "rcr", "field_percentile"}));
        min_year_opt = c->add_option("--min-year", min_year, "drop articles published before this year");
        h_opt = c->add_option("--h-ceiling", h_ceiling, "stop once the h-index of the set exceeds this");
        pop_opt = c->add_option("--max-pop", max_pop, "stop once the set reaches this size");
        c->add_flag("--exclude-stubs", exclude_stubs, "backward: skip references missing from the corpus");
        c->add_option("--out", out, "trace path (default stdout)");
        c->add_option("--fetched-out", fetched_out, "remote runs: write fetched records as JSONL");
        c->add_option("--max-malformed", max_malformed, "abort above this fraction of malformed lines");
        src.add_to(c);
        c->callback([this, &run, &s] { run = [this, &s] { exec(s); }; });
    }

    expand::ExpansionSpec spec() const {
        expand::ExpansionSpec sp;
        sp.direction = (direction == "fwd" || direction == "forward") ? expand::Direction::forward : expand::Direction::backward;
        sp.max_steps = steps;
        sp.per_article_limit = limit;
        if (key == "times_cited") sp.key = expand::SelectionKey::times_cited;
        else if (key == "altmetric") sp.key = expand::SelectionKey::altmetric;
        else if (key == "rcr") sp.key = expand::SelectionKey::rcr;
        else sp.key = expand::SelectionKey::field_percentile;
        if (min_year_opt->count()) sp.min_year = min_year;
        if (h_opt->count()) sp.h_index_ceiling = h_ceiling;
        if (pop_opt->count()) sp.max_population = max_pop;
        sp.exclude_stubs = exclude_stubs;
        return sp;
    }

    void exec(Session& s) {
        const auto sp = spec();
        IdSet seed_ids = parse_ids(seeds, s);
        if (!store.empty()) {
            auto st = load_store(store, max_malformed, s);
            s.emit(out, io::dump(io::to_json(expand::run(st, seed_ids, sp), io::to_json(sp))));
            return;
        }
        auto client = fetch::make_client(src.config(s));
        auto write_fetched = [&](const std::vector<Publication>& recs) {
            if (fetched_out.empty()) return;
            std::ostringstream os;
            corpus::write_jsonl(os, recs);
            s.emit(fetched_out, os.str());
        };
        try {
            auto r = expand::run_remote(client, seed_ids, sp);
            write_fetched(r.records);
            s.emit(out, io::dump(io::to_json(r.trace, io::to_json(sp))));
        } catch (const expand::IncompleteExpansion& e) {
            write_fetched(e.partial.records);
            s.emit(out, io::dump(io::to_json(e.partial.trace, io::to_json(sp))));
            throw;
        }
    }
};

struct MetricsCmd {
    std::string store, ids, values, counts, series, out, json_out;
    double cutoff = 50.0, gamma = 1.0, ratio = 2.0, max_malformed = 0.10;
    int first_year = 1;

    void add(CLI::App& app, std::function<void()>& run, Session& s) {
        auto* m = app.add_subcommand("metrics", "h-index, threshold profile, field normalization, bursts");
        m->require_subcommand(1);

        auto* h = m->add_subcommand("h", "h-index of a citation multiset or an id set");
        h->add_option("--values", values, "comma-separated citation counts");
        h->add_option("--store", store, "JSONL corpus");
        h->add_option("--ids", ids, "ids: a,b,c or @file");
        h->callback([this, &run, &s] { run = [this, &s] { exec_h(s); }; });

        auto* p = m->add_subcommand("profile", "publication counts at citation thresholds");
        p->add_option("--store", store, "JSONL corpus")->required();
        p->add_option("--ids", ids, "ids: a,b,c or @file")->required();
        p->add_option("--json", json_out, "also write the profile as JSON");
        p->callback([this, &run, &s] { run = [this, &s] { exec_profile(s); }; });

        auto* n = m->add_subcommand("normalize", "keep ids at or above a field-and-year percentile");
        n->add_option("--store", store, "JSONL corpus")->required();
        n->add_option("--ids", ids, "ids: a,b,c or @file")->required();
        n->add_option("--cutoff", cutoff, "percentile cutoff");
        n->add_option("--out", out, "idset artifact path (default stdout)");
        n->callback([this, &run, &s] { run = [this, &s] { exec_normalize(s); }; });

        auto* b = m->add_subcommand("burst", "burst intervals of a yearly count series");
        b->add_option("--counts", counts, "year:count pairs, comma-separated");
        b->add_option("--series", series, "comma-separated counts for consecutive years");
        b->add_option("--first-year", first_year, "year of the first --series entry");
        b->add_option("--gamma", gamma, "burst entry cost multiplier");
        b->add_option("--ratio", ratio, "burst rate / base rate");
        b->add_option("--out", out, "artifact path (default stdout)");
        b->callback([this, &run, &s] { run = [this, &s] { exec_burst(s); }; });

        for (auto* sub : {h, p, n})
            sub->add_option("--max-malformed", max_malformed, "abort above this fraction of malformed lines");
    }

    std::vector<std::int64_t> citations(Session& s) {
        std::vector<std::int64_t> v;
        if (!values.empty()) {
            for (const auto& x : split(values, ',')) v.push_back(std::stoll(x));
            return v;
        }
        if (store.empty() || ids.empty()) throw UsageError("give --values, or --store with --ids");
        auto st = load_store(store, max_malformed, s);
        for (const auto& id : parse_ids(ids, s)) v.push_back(st.at(id).times_cited);
        return v;
    }

    void exec_h(Session& s) {
        auto v = citations(s);
        s.emit(out, std::to_string(metrics::h_index(v)) + "\n");
    }

    void exec_profile(Session& s) {
        auto st = load_store(store, max_malformed, s);
        auto set = parse_ids(ids, s);
        auto prof = metrics::threshold_profile(st, set);
        std::ostringstream os;
        const char* heads[] = {"Size", "Cites>=1", ">=10", ">=10^2", ">=10^3", ">=10^4", ">=10^5", "h-index"};
        for (const char* h : heads) os << std::setw(10) << h;
        os << "\n" << std::setw(10) << prof.set_size;
        for (auto c : prof.counts_at) os << std::setw(10) << c;
        os << std::setw(10) << prof.h_index << "\n";
        s.emit("", os.str());
        if (!json_out.empty()) {
            Json j = io::envelope("profile");
            j["set_size"] = prof.set_size;
            Json counts_at = Json::object();
            for (std::size_t i = 0; i < metrics::kThresholds.size(); ++i)
                counts_at[std::to_string(metrics::kThresholds[i])] = prof.counts_at[i];
            j["counts_at"] = std::move(counts_at);
            j["h_index"] = prof.h_index;
            s.emit(json_out, io::dump(j));
        }
    }

    void exec_normalize(Session& s) {
        auto st = load_store(store, max_malformed, s);
        auto r = metrics::normalize_filter(st, parse_ids(ids, s), cutoff);
        if (r.non_normalizable > 0)
            std::cerr << "warning: " << r.non_normalizable << " ids lack a field of research or year; kept\n";
        Json j = io::idset_to_json(r.kept);
        j["cutoff"] = cutoff;
        j["non_normalizable"] = r.non_normalizable;
        s.emit(out, io::dump(j));
    }

    void exec_burst(Session& s) {
        std::map<int, std::int64_t> yearly;
        if (!counts.empty()) {
            for (const auto& pair : split(counts, ',')) {
                auto colon = pair.find(':');
                if (colon == std::string::npos) throw UsageError("--counts expects year:count pairs");
                yearly[std::stoi(pair.substr(0, colon))] += std::stoll(pair.substr(colon + 1));
            }
        } else if (!series.empty()) {
            int y = first_year;
            for (const auto& x : split(series, ',')) yearly[y++] = std::stoll(x);
        } else {
            throw UsageError("give --counts or --series");
        }
        Json a = Json::array();
        for (const auto& b : metrics::burst_detect(yearly, gamma, ratio))
            a.push_back(Json{{"start_year", b.start_year}, {"end_year", b.end_year}, {"strength", b.strength}});
        Json j = io::envelope("bursts");
        j["gamma"] = gamma;
        j["ratio"] = ratio;
        j["bursts"] = std::move(a);
        s.emit(out, io::dump(j));
    }
};

struct NetCmd {
    std::string store, citers, out;
    int slice_length = pipeline::kDefaultSliceLength;
    std::size_t cap = pipeline::kDefaultNodeCap;
    int start_year = 0, end_year = 0;
    bool lcc = true;
    double max_malformed = 0.10;
    CLI::Option *slice_opt = nullptr, *cap_opt = nullptr, *start_opt = nullptr, *end_opt = nullptr;

    void add(CLI::App& app, std::function<void()>& run, Session& s) {
        auto* c = app.add_subcommand("net", "build a time-sliced co-citation network");
        c->add_option("--store", store, "JSONL corpus")->required();
        c->add_option("--citers", citers, "citing articles: a,b,c or @file (trace/idset/list)")->required();
        slice_opt = c->add_option("--slice-length", slice_length, "years per slice");
        cap_opt = c->add_option("--cap", cap, "references kept per slice (0 = all)");
        start_opt = c->add_option("--start-year", start_year, "first slice year (default: earliest citer)");
        end_opt = c->add_option("--end-year", end_year, "last slice year (default: latest citer)");
        c->add_flag("--lcc,!--no-lcc", lcc, "keep only the largest connected component (default on)");
        c->add_option("--out", out, "artifact path (default stdout)");
        c->add_option("--max-malformed", max_malformed, "abort above this fraction of malformed lines");
        c->callback([this, &run, &s] { run = [this, &s] { exec(s); }; });
    }

    void exec(Session& s) {
        auto st = load_store(store, max_malformed, s);
        IdSet ids = parse_ids(citers, s);
        pipeline::NetworkOptions o;
        o.slice_length = slice_length;
        o.node_cap = cap == 0 ? std::nullopt : std::optional<std::size_t>(cap);
        if (start_opt->count()) o.start_year = start_year;
        if (end_opt->count()) o.end_year = end_year;
        o.largest_component = false;
        auto full = pipeline::network_for(st, ids, o);
        auto [component, fraction] = conet::largest_component(full);
        Json meta = Json::object();
        meta["citers"] = ids.size();
        meta["slice_length_default"] = slice_opt->count() == 0;
        meta["node_cap_default"] = cap_opt->count() == 0;
        meta["largest_component"] = lcc;
        meta["component_fraction"] = fraction;
        meta["nodes_before_component"] = full.nodes.size();
        s.emit(out, io::dump(io::to_json(lcc ? component : full, nullptr, meta)));
    }
};

struct ClusterCmd {
    std::string net, store, citers, out;
    double max_malformed = 0.10;

    void add(CLI::App& app, std::function<void()>& run, Session& s) {
        auto* c = app.add_subcommand("cluster", "modularity clustering and title-based labels");
        c->add_option("--net", net, "network artifact")->required();
        c->add_option("--store", store, "corpus (needed for labels)");
        c->add_option("--citers", citers, "citing articles for labels: a,b,c or @file");
        c->add_option("--out", out, "artifact path (default stdout)");
        c->add_option("--max-malformed", max_malformed, "abort above this fraction of malformed lines");
        c->callback([this, &run, &s] { run = [this, &s] { exec(s); }; });
    }

    void exec(Session& s) {
        s.input(net);
        auto network = io::network_from_json(io::read_json_file(net), net);
        conet::ClusterSet cs;
        if (!store.empty() && !citers.empty()) {
            auto st = load_store(store, max_malformed, s);
            cs = pipeline::clusters_for(network, st, parse_ids(citers, s));
        } else {
            cs = conet::cluster(network);
        }
        s.emit(out, io::dump(io::to_json(cs)));
    }
};

struct SvaCmd {
    std::string store, net, clusters, candidates, out, dot;
    std::size_t top = 10;
    double max_malformed = 0.10;

    void add(CLI::App& app, std::function<void()>& run, Session& s) {
        auto* c = app.add_subcommand("sva", "structural variation analysis of candidate articles");
        c->add_option("--store", store, "JSONL corpus")->required();
        c->add_option("--net", net, "baseline network artifact")->required();
        c->add_option("--clusters", clusters, "baseline clusters artifact")->required();
        c->add_option("--candidates", candidates, "candidate articles: a,b,c or @file")->required();
        c->add_option("--top", top, "candidates reported");
        c->add_option("--out", out, "artifact path (default stdout)");
        c->add_option("--dot", dot, "also write a DOT rendering of the top candidates' links");
        c->add_option("--max-malformed", max_malformed, "abort above this fraction of malformed lines");
        c->callback([this, &run, &s] { run = [this, &s] { exec(s); }; });
    }

    void exec(Session& s) {
        auto st = load_store(store, max_malformed, s);
        s.input(net);
        s.input(clusters);
        auto baseline = io::network_from_json(io::read_json_file(net), net);
        auto part = io::clusters_from_json(io::read_json_file(clusters), clusters);
        auto report = sva::sva_run(st, parse_ids(candidates, s), baseline, part, top);
        s.emit(out, io::dump(io::to_json(report)));
        if (!dot.empty()) s.emit(dot, io::sva_to_dot(baseline, report));
    }
};

struct OverlayCmd {
    std::string base, fore, out, report;

    void add(CLI::App& app, std::function<void()>& run, Session& s) {
        auto* c = app.add_subcommand("overlay", "overlay an original-set network on an expanded-set network");
        c->add_option("--base", base, "expanded-set network (background)")->required();
        c->add_option("--fore", fore, "original-set network (foreground)")->required();
        c->add_option("--out", out, "merged, classified network artifact");
        c->add_option("--report", report, "overlay report path (default stdout)");
        c->callback([this, &run, &s] { run = [this, &s] { exec(s); }; });
    }

    void exec(Session& s) {
        s.input(base);
        s.input(fore);
        auto b = io::network_from_json(io::read_json_file(base), base);
        auto f = io::network_from_json(io::read_json_file(fore), fore);
        auto r = sva::overlay(b, f);
        if (!out.empty()) s.emit(out, io::dump(io::to_json(sva::overlay_network(b, f, r))));
        s.emit(report, io::dump(io::to_json(r)));
    }
};

struct ExportCmd {
    std::string net, clusters, format = "graphml", out;

    void add(CLI::App& app, std::function<void()>& run, Session& s) {
        auto* c = app.add_subcommand("export", "export a network as GraphML, DOT or JSON");
        c->add_option("--net", net, "network artifact")->required();
        c->add_option("--clusters", clusters, "clusters artifact");
        c->add_option("--format", format, "graphml | dot | json");
        c->add_option("--out", out, "artifact path (default stdout)");
        c->callback([this, &run, &s] { run = [this, &s] { exec(s); }; });
    }

    void exec(Session& s) {
        auto fmt = io::export_format_from(format);
        s.input(net);
        auto network = io::network_from_json(io::read_json_file(net), net);
        std::optional<conet::ClusterSet> cs;
        if (!clusters.empty()) {
            s.input(clusters);
            cs = io::clusters_from_json(io::read_json_file(clusters), clusters);
        }
        s.emit(out, io::export_network(network, cs ? &*cs : nullptr, fmt));
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cascade - cascading citation expansion and co-citation analysis"};
    app.set_version_flag("--version", std::string(CASCADE_VERSION));
    app.set_config("--config", "", "read options from a TOML/INI file (sections per subcommand)");
    app.require_subcommand(1);

    Session session;
    for (int i = 0; i < argc; ++i) session.manifest.command_line.emplace_back(argv[i]);
    app.add_option("--manifest", session.manifest_path, "write a run manifest (config, digests, timestamps)");

    std::function<void()> run;
    IngestCmd ingest;
    QueryCmd query;
    ExpandCmd expand_cmd;
    MetricsCmd metrics_cmd;
    NetCmd net;
    ClusterCmd cluster;
    SvaCmd sva_cmd;
    OverlayCmd overlay;
    ExportCmd export_cmd;
    ingest.add(app, run, session);
    query.add(app, run, session);
    expand_cmd.add(app, run, session);
    metrics_cmd.add(app, run, session);
    net.add(app, run, session);
    cluster.add(app, run, session);
    sva_cmd.add(app, run, session);
    overlay.add(app, run, session);
    export_cmd.add(app, run, session);

    if (argc <= 1) {
        std::cerr << app.help();
        return 1;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (run) run();
        if (!session.manifest_path.empty()) {
            session.manifest.config = app.config_to_str(true, false);
            io::write_text(session.manifest_path, io::dump(session.manifest.to_json()));
        }
    } catch (const UsageError& e) {
        std::cerr << "cascade: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "cascade: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
