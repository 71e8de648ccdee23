// Acceptance suite: one PASS/FAIL line per criterion, each under its own
// time limit. Exit status is the number of failed criteria.

#include "cascade/dsl.hpp"
#include "cascade/expansion.hpp"
#include "cascade/fetch.hpp"
#include "cascade/io.hpp"
#include "cascade/metrics.hpp"
#include "cascade/pipeline.hpp"
#include "cascade/sva.hpp"

#include "support/files.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <sys/wait.h>

using namespace cascade;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(bool ok, const std::string& what) {
    if (!ok) throw Failure(what);
}

const std::string kData = CASCADE_TEST_DATA;

IdSet ids_of(const CitationStore& s) {
    IdSet out;
    for (const auto& [id, p] : s.records()) out.insert(id);
    return out;
}

// 1 ---------------------------------------------------------------------------

void h_index_oracle() {
    gen::Rng rng(1001);
    for (int i = 0; i < 1000; ++i) {
        std::vector<std::int64_t> xs(static_cast<std::size_t>(rng.uniform(0, 200)));
        const std::int64_t top = rng.chance(0.5) ? 30 : 5000;
        for (auto& x : xs) x = rng.uniform64(0, top);
        check(metrics::h_index(xs) == oracle::h_index(xs), "h_index differs from definition in case " + std::to_string(i));
    }
}

// 2 ---------------------------------------------------------------------------

void transpose_and_duality() {
    gen::Rng rng(1002);
    for (int round = 0; round < 50; ++round) {
        auto s = CitationStore::from_records(gen::corpus(rng, {rng.uniform(1, 300), 8, 0.05, 1990, 2020}));
        // Reverse index rebuilt from reference lists alone.
        std::map<std::string, IdSet> cited_by;
        for (const auto& [id, p] : s.records())
            for (const auto& r : p.reference_ids) cited_by[r].insert(id);
        for (const auto& [id, p] : s.records()) check(s.citing_of(id) == cited_by[id], "citing index of " + id);
        for (const auto& st : s.stubs()) check(s.citing_of(st).empty() && !s.contains(st), "stub " + st + " indexed");
        std::size_t links = 0, back_links = 0;
        for (const auto& [id, p] : s.records())
            for (const auto& r : p.reference_ids) links += s.contains(r);
        for (const auto& [id, c] : cited_by) back_links += s.citing_of(id).size();
        check(links == back_links, "link counts differ");

        std::map<std::string, IdSet> fwd, bwd;
        for (const auto& [id, p] : s.records()) {
            fwd[id] = expand::forward_step(s, {id}, {}, expand::kUnlimited);
            bwd[id] = expand::backward_step(s, {id}, {}, expand::kUnlimited);
        }
        for (const auto& [a, fa] : fwd)
            for (const auto& b : fa) check(bwd[b].count(a) == 1, "forward " + a + "->" + b + " has no backward dual");
        for (const auto& [b, bb] : bwd)
            for (const auto& a : bb)
                if (s.contains(a)) check(fwd[a].count(b) == 1, "backward " + b + "->" + a + " has no forward dual");
    }
}

// 3 ---------------------------------------------------------------------------

void population_bound() {
    gen::Rng rng(1003);
    for (int graph = 0; graph < 4; ++graph) {
        auto s = CitationStore::from_records(gen::corpus(rng, {rng.uniform(200, 400), 20, 0.0, 1990, 2020}));
        for (int g0 : {1, 3})
            for (std::size_t L : {std::size_t{2}, std::size_t{10}})
                for (int k = 1; k <= 4; ++k) {
                    IdSet seeds;
                    while (static_cast<int>(seeds.size()) < g0) seeds.insert(gen::pid(rng.uniform(0, 199)));
                    expand::ExpansionSpec spec;
                    spec.max_steps = k;
                    spec.per_article_limit = L;
                    auto t = expand::run(s, seeds, spec);
                    std::size_t grown = 0;
                    for (std::size_t i = 1; i < t.generations.size(); ++i) grown += t.generations[i].size();
                    std::size_t bound = 0, pw = 1;
                    for (int i = 1; i <= k; ++i) bound += (pw *= L);
                    bound *= static_cast<std::size_t>(g0);
                    check(grown <= bound, "population " + std::to_string(grown) + " exceeds " + std::to_string(bound));
                    if (g0 == 1 && L == 10) {
                        std::size_t ten_k = 1;
                        for (int i = 0; i < k; ++i) ten_k *= 10;
                        check(grown <= 2 * ten_k, "L=10 growth not within order 10^k");
                    }
                }
    }
}

// 4 ---------------------------------------------------------------------------

void dsl_contract() {
    using namespace dsl;
    Query t1;
    t1.text_search = TextSearch{Scope::title_only, "emerging trends"};
    t1.predicates = {{"references", Op::eq, std::string("pub.1001131784")}};
    t1.projection = {"title", "year"};
    t1.sort = Sort{"year", false};
    check(parse(R"(search publications in title_only for "emerging trends" where references = "pub.1001131784" )"
                R"(return publications[title+year] sort by year)") == t1,
          "citing-articles query AST");

    Query t2;
    t2.predicates = {{"issn", Op::in_set, std::vector<std::string>{"0138-9130", "1588-2861"}},
                     {"times_cited", Op::gt, std::int64_t{0}},
                     {"references", Op::is_not_empty, std::monostate{}}};
    check(parse(R"(search publications where issn in ["0138-9130", "1588-2861"] and times_cited>0 and references )"
                R"(is not empty return publications[all])") == t2,
          "journal query AST");

    Query t3;
    t3.predicates = {{"FOR.name", Op::eq, std::string("1109 Neurosciences")}};
    t3.projection = {"title", "times_cited", "altmetric", "year"};
    t3.sort = Sort{"altmetric", true};
    t3.limit = 1;
    check(parse(R"(search publications where FOR.name="1109 Neurosciences" )"
                R"(return publications[title+times_cited+altmetric+year] sort by altmetric limit 1)") == t3,
          "field query AST");

    gen::Rng rng(1004);
    for (int i = 0; i < 500; ++i) {
        auto q = gen::query(rng);
        check(parse(format(q)) == q, "round trip failed for " + format(q));
    }

    std::vector<Publication> recs;
    for (int i = 0; i < 30; ++i) recs.push_back(gen::pub(gen::pid(i), i < 25 ? 2010 : 1999, i));
    auto s = CitationStore::from_records(std::move(recs));
    auto page = evaluate(s, parse("search publications where year = 2010 return publications[id]"));
    check(page.items.size() == 20, "default page size");
    check(page.total_count == 25, "total_count");
}

// 5 ---------------------------------------------------------------------------

void wire_shape() {
    const std::string body_path = kData + "/doi_lookup_body.json";
    auto archive = fetch::FixtureArchive::load(kData + "/doi_lookup_archive.jsonl");
    fetch::SourceConfig cfg;
    cfg.page_limit = 1000;
    fetch::Client client(cfg, std::make_unique<fetch::ReplayTransport>(std::move(archive)));
    auto q = dsl::parse("search publications where doi = \"10.1002/asi.20317\" "
                        "return publications[title+doi+id+times_cited] limit 1000");
    auto page = client.request_page(q, 0);
    check(page.total_count == 1 && page.items.size() == 1, "page size");
    check(page.items[0].at("id") == "pub.1001131784", "id");
    check(page.items[0].at("times_cited") == 554, "times_cited");
    check(io::dump(dsl::to_json(page)) == testfs::read(body_path), "re-serialization differs from fixture bytes");
}

// 6 ---------------------------------------------------------------------------

void cocitation_brute_force() {
    gen::Rng rng(1006);
    for (int round = 0; round < 50; ++round) {
        auto s = CitationStore::from_records(gen::corpus(rng, {rng.uniform(1, 50), 12, 0.2, 2000, 2010}));
        auto citers = ids_of(s);
        auto net = conet::build(s, citers, {2000, 2010, rng.uniform(1, 3), std::nullopt});
        auto want = oracle::cocitation_pairs(s, citers);
        check(net.edges.size() == want.size(), "edge count");
        for (const auto& [pair, w] : want) {
            auto it = net.edges.find(conet::EdgeKey::of(pair.first, pair.second));
            check(it != net.edges.end() && it->second.weight == w, "weight of " + pair.first + "--" + pair.second);
        }
    }
}

// 7 ---------------------------------------------------------------------------

void modularity_contract() {
    auto tri = gen::two_triangles();
    std::map<std::string, int> truth{{"a", 0}, {"b", 0}, {"c", 0}, {"d", 1}, {"e", 1}, {"f", 1}};
    check(std::abs(conet::modularity(tri, truth) - 0.5) <= 1e-12, "two-triangle Q");
    auto cs = conet::cluster(tri);
    check(cs.partition == truth, "clusterer did not recover the triangles");
    check(std::abs(cs.modularity - 0.5) <= 1e-12, "reported Q on triangles");

    gen::Rng rng(1007);
    for (int round = 0; round < 50; ++round) {
        auto net = gen::network(rng, rng.uniform(1, 60), rng.uniform(3, 30) / 100.0);
        auto c = conet::cluster(net);
        check(std::abs(c.modularity - oracle::modularity(net, c.partition)) <= 1e-12, "reported Q off the formula");
    }
}

// 8 ---------------------------------------------------------------------------

// Kept iff the mean sorted position of the value's tie group reaches n/2.
IdSet median_oracle(const std::vector<std::pair<std::string, std::int64_t>>& cohort) {
    auto sorted = cohort;
    std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.second < b.second; });
    IdSet kept;
    const double half = static_cast<double>(sorted.size()) / 2.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j].second == sorted[i].second) ++j;
        double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        if (mid >= half)
            for (std::size_t k = i; k < j; ++k) kept.insert(sorted[k].first);
        i = j;
    }
    return kept;
}

CitationStore cohort_store(const std::vector<std::pair<std::string, std::int64_t>>& cohort) {
    std::vector<Publication> recs;
    for (const auto& [id, c] : cohort) recs.push_back(gen::pub(id, 2012, c, {}, "t", "0807"));
    return CitationStore::from_records(std::move(recs));
}

void normalization() {
    std::vector<std::vector<std::int64_t>> hand{
        {1, 2, 3, 4, 5}, {1, 2, 3, 4}, {1, 2, 2, 3}, {5, 5, 5}, {7}, {0, 0, 9}, {1, 1, 1, 5, 5}, {3, 3, 1, 1}};
    gen::Rng rng(1008);
    for (int i = 0; i < 200; ++i) {
        std::vector<std::int64_t> xs(static_cast<std::size_t>(rng.uniform(1, 25)));
        for (auto& x : xs) x = rng.uniform64(0, 8);
        hand.push_back(std::move(xs));
    }
    for (const auto& values : hand) {
        std::vector<std::pair<std::string, std::int64_t>> cohort;
        for (std::size_t i = 0; i < values.size(); ++i) cohort.emplace_back(gen::pid(static_cast<int>(i)), values[i]);
        auto s = cohort_store(cohort);
        check(metrics::normalize_filter(s, ids_of(s), 50.0).kept == median_oracle(cohort), "median cut differs");

        auto rescaled = cohort;
        for (auto& [id, c] : rescaled) c = 3 * c * c + 7;
        auto r = cohort_store(rescaled);
        for (const auto& [id, c] : cohort)
            check(metrics::cohort_percentile(s, id).percentile == metrics::cohort_percentile(r, id).percentile,
                  "percentile moved under rescaling");
    }
    auto ties = cohort_store({{"a", 1}, {"b", 2}, {"c", 2}, {"d", 3}});
    check(metrics::normalize_filter(ties, ids_of(ties)).kept == IdSet{"b", "c", "d"}, "tie at median");
}

// 9 ---------------------------------------------------------------------------

void burst_oracle() {
    gen::Rng rng(1009);
    const metrics::BurstParams defaults;
    for (int i = 0; i < 100; ++i) {
        const int n = rng.uniform(1, 12);
        std::vector<std::int64_t> xs(static_cast<std::size_t>(n));
        for (auto& x : xs) x = rng.chance(0.25) ? rng.uniform64(6, 50) : rng.uniform64(0, 5);
        std::map<int, std::int64_t> yearly;
        for (int t = 0; t < n; ++t) yearly[1990 + t] = xs[static_cast<std::size_t>(t)];
        auto want = oracle::runs(oracle::burst_states(xs, defaults.gamma, defaults.ratio));
        auto got = metrics::burst_detect(yearly, defaults.gamma, defaults.ratio);
        check(got.size() == want.size(), "interval count differs in case " + std::to_string(i));
        for (std::size_t k = 0; k < got.size(); ++k)
            check(got[k].start_year == 1990 + want[k].first && got[k].end_year == 1990 + want[k].second,
                  "interval bounds differ in case " + std::to_string(i));
    }
}

// 10 --------------------------------------------------------------------------

void sva_contract() {
    auto tri = gen::two_triangles();
    conet::ClusterSet part = conet::cluster(tri);
    auto s = CitationStore::from_records(
        {gen::pub("cross", 2010, 1, {"c", "d"}), gen::pub("intra", 2010, 1, {"a", "c"})});
    auto report = sva::sva_run(s, {"cross", "intra"}, tri, part);
    check(report.ranked.front().article_id == "cross", "cross-cluster candidate not ranked first");
    check(std::abs(report.ranked[0].delta_q) > std::abs(report.ranked[1].delta_q), "delta_Q order");
    // The same comparison with an intra-cluster link counted as new.
    check(sva::delta_modularity(tri, part, {{"c", "d"}}) > sva::delta_modularity(tri, part, {{"a", "c"}}),
          "cross link does not outrank an intra link");

    gen::Rng rng(1010);
    int divergence_cases = 0;
    while (divergence_cases < 100) {
        auto net = gen::network(rng, rng.uniform(2, 30), 0.2);
        auto cs = conet::cluster(net);
        std::vector<std::string> ids;
        for (const auto& [id, n] : net.nodes) ids.push_back(id);
        std::vector<sva::Pair> novel;
        for (int k = rng.uniform(0, 5); k > 0; --k) {
            auto u = rng.pick(ids), v = rng.pick(ids);
            if (u != v) novel.emplace_back(std::min(u, v), std::max(u, v));
        }
        double full = oracle::modularity(net, cs.partition) - oracle::modularity(net, cs.partition, novel);
        check(std::abs(sva::delta_modularity(net, cs, novel) - full) <= 1e-12, "delta_Q differs from recomputation");
        double d = sva::centrality_divergence(net, novel);
        check(d >= 0.0, "negative divergence");
        if (novel.empty()) check(d == 0.0, "divergence of an empty novel set");
        ++divergence_cases;
    }
    check(sva::centrality_divergence(tri, {}) == 0.0, "empty novel set");
}

// 11 --------------------------------------------------------------------------

void overlay_partition() {
    gen::Rng rng(1011);
    for (int i = 0; i < 100; ++i) {
        auto base = gen::network(rng, rng.uniform(0, 40), 0.15);
        auto fore = gen::network(rng, rng.uniform(0, 40), 0.15);
        auto r = sva::overlay(base, fore);
        check(r.nodes.shared + r.nodes.original == fore.nodes.size(), "fore nodes");
        check(r.nodes.shared + r.nodes.expansion_only == base.nodes.size(), "base nodes");
        check(r.edges.shared + r.edges.original == fore.edges.size(), "fore edges");
        check(r.edges.shared + r.edges.expansion_only == base.edges.size(), "base edges");
    }
}

// 12 --------------------------------------------------------------------------

std::string quote(const std::string& s) { return "'" + s + "'"; }

void run_cli(const std::vector<std::string>& args) {
    std::string cmd = quote(CASCADE_CLI);
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " >/dev/null";
    int status = std::system(cmd.c_str());
    check(WIFEXITED(status) && WEXITSTATUS(status) == 0, "cli failed: " + cmd);
}

void end_to_end() {
    const std::string corpus = kData + "/corpus200.jsonl";
    auto store = corpus::ingest_jsonl(corpus);
    check(store.size() == 200, "fixture size");
    expand::ExpansionSpec spec;
    spec.max_steps = 2;
    spec.per_article_limit = 3;

    auto exports = [&] {
        auto r = pipeline::run(store, {"pub.seed"}, spec);
        std::vector<std::string> out;
        for (auto f : {io::ExportFormat::graphml, io::ExportFormat::dot, io::ExportFormat::json})
            out.push_back(io::export_network(r.network, &r.clusters, f));
        return out;
    };
    auto first = exports();
    check(first == exports(), "in-process runs differ");
    check(first[0].find("<node ") != std::string::npos, "empty network");

    testfs::ScratchDir dir;
    run_cli({"expand", "--store", corpus, "--seeds", "pub.seed", "--steps", "2", "--limit", "3", "--out", dir.file("t.json")});
    run_cli({"net", "--store", corpus, "--citers", "@" + dir.file("t.json"), "--out", dir.file("n.json")});
    run_cli({"cluster", "--net", dir.file("n.json"), "--store", corpus, "--citers", "@" + dir.file("t.json"), "--out",
             dir.file("c.json")});
    const char* formats[] = {"graphml", "dot", "json"};
    for (std::size_t i = 0; i < 3; ++i) {
        auto path = dir.file(std::string("export.") + formats[i]);
        run_cli({"export", "--net", dir.file("n.json"), "--clusters", dir.file("c.json"), "--format", formats[i], "--out",
                 path});
        check(testfs::read(path) == first[i], std::string(formats[i]) + " export differs between CLI and in-process");
    }
}

struct Criterion {
    int number;
    std::string name;
    double limit_s;
    std::function<void()> body;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "h-index oracle", 5, h_index_oracle},
        {2, "transpose and duality", 10, transpose_and_duality},
        {3, "population bound", 10, population_bound},
        {4, "DSL parse, round trip, paging", 5, dsl_contract},
        {5, "wire shape replay", 1, wire_shape},
        {6, "co-citation brute force", 10, cocitation_brute_force},
        {7, "modularity", 10, modularity_contract},
        {8, "normalization", 5, normalization},
        {9, "burst DP oracle", 30, burst_oracle},
        {10, "structural variation", 10, sva_contract},
        {11, "overlay partition", 5, overlay_partition},
        {12, "end-to-end determinism", 10, end_to_end},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        std::string detail;
        bool ok = true;
        auto t0 = std::chrono::steady_clock::now();
        try {
            c.body();
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (ok && secs > c.limit_s) {
            ok = false;
            detail = "over time limit";
        }
        failed += !ok;
        std::printf("criterion %2d: %s  %-32s %7.3f s (limit %g s)%s%s\n", c.number, ok ? "PASS" : "FAIL", c.name.c_str(),
                    secs, c.limit_s, detail.empty() ? "" : "  ", detail.c_str());
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed;
}
