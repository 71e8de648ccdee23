#include "cascade/expansion.hpp"

#include "support/generators.hpp"

#include <gtest/gtest.h>

using namespace cascade;
using namespace cascade::expand;
using gen::pub;

namespace {

// A <- B <- C: B cites A, C cites B.
CitationStore chain() {
    return CitationStore::from_records({pub("A", 2000, 5), pub("B", 2001, 3, {"A"}), pub("C", 2002, 1, {"B"})});
}

ExpansionSpec forward(int steps, std::size_t limit = 10) {
    ExpansionSpec s;
    s.direction = Direction::forward;
    s.max_steps = steps;
    s.per_article_limit = limit;
    return s;
}

ExpansionSpec backward(int steps, std::size_t limit = 10) {
    auto s = forward(steps, limit);
    s.direction = Direction::backward;
    return s;
}

using Gens = std::vector<std::vector<std::string>>;

class FailingTransport : public fetch::Transport {
public:
    FailingTransport(const CitationStore& store, int fail_from) : inner_(store), fail_from_(fail_from) {}
    fetch::RawResponse post(const fetch::PageRequest& req) override {
        if (calls_++ >= fail_from_) return {500, "down"};
        return inner_.post(req);
    }

private:
    fetch::StoreTransport inner_;
    int fail_from_;
    int calls_ = 0;
};

fetch::Client store_client(const CitationStore& store, int page_limit = 1000) {
    fetch::SourceConfig cfg;
    cfg.page_limit = page_limit;
    cfg.retry = {2, 0};
    return fetch::Client(cfg, std::make_unique<fetch::StoreTransport>(store));
}

} // namespace

TEST(Expansion, EmptyFrontierSteps) {
    auto s = chain();
    EXPECT_TRUE(forward_step(s, {}, {}, 10, SelectionKey::times_cited).empty());
    EXPECT_TRUE(backward_step(s, {}, {}, 10, SelectionKey::times_cited).empty());
}

TEST(Expansion, ForwardStepRanksByKey) {
    auto s = CitationStore::from_records(
        {pub("A", 2000, 0), pub("B", 2001, 5, {"A"}), pub("C", 2001, 9, {"A"}), pub("D", 2001, 9, {"A"})});
    EXPECT_EQ(forward_step(s, {"A"}, {"A"}, 2, SelectionKey::times_cited), (IdSet{"C", "D"}));
    // Tie at the boundary is cut by id.
    EXPECT_EQ(forward_step(s, {"A"}, {"A"}, 1, SelectionKey::times_cited), (IdSet{"C"}));
}

TEST(Expansion, SeenCitersSkipped) {
    auto s = CitationStore::from_records({pub("A", 2000, 0), pub("B", 2001, 5, {"A"})});
    EXPECT_TRUE(forward_step(s, {"A"}, {"A", "B"}, 10, SelectionKey::times_cited).empty());
}

TEST(Expansion, BackwardStepOnChain) {
    EXPECT_EQ(backward_step(chain(), {"C"}, {"C"}, 10, SelectionKey::times_cited), (IdSet{"B"}));
}

TEST(Expansion, BackwardStepKeepsTopTen) {
    std::vector<Publication> recs;
    std::vector<std::string> refs;
    for (int i = 0; i < 12; ++i) {
        recs.push_back(pub(gen::pid(i), 1990, i));
        refs.push_back(gen::pid(i));
    }
    recs.push_back(pub("B", 2000, 0, refs));
    auto s = CitationStore::from_records(recs);
    IdSet want;
    for (int i = 2; i < 12; ++i) want.insert(gen::pid(i));
    EXPECT_EQ(backward_step(s, {"B"}, {"B"}, 10, SelectionKey::times_cited), want);
}

TEST(Expansion, BackwardStubsRankAsZeroUnlessExcluded) {
    auto s = CitationStore::from_records({pub("B", 2000, 0, {"R", "stub"}), pub("R", 1990, 0)});
    EXPECT_EQ(backward_step(s, {"B"}, {"B"}, 10, SelectionKey::times_cited), (IdSet{"R", "stub"}));
    EXPECT_EQ(backward_step(s, {"B"}, {"B"}, 10, SelectionKey::times_cited, true), (IdSet{"R"}));
}

TEST(Expansion, AlternativeKeys) {
    auto b = pub("B", 2001, 100, {"A"});
    auto c = pub("C", 2001, 1, {"A"});
    c.altmetric = 50;
    c.rcr = 3.0;
    b.rcr = 0.5;
    auto s = CitationStore::from_records({pub("A", 2000, 0), b, c});
    EXPECT_EQ(forward_step(s, {"A"}, {"A"}, 1, SelectionKey::times_cited), (IdSet{"B"}));
    EXPECT_EQ(forward_step(s, {"A"}, {"A"}, 1, SelectionKey::altmetric), (IdSet{"C"}));
    EXPECT_EQ(forward_step(s, {"A"}, {"A"}, 1, SelectionKey::rcr), (IdSet{"C"}));
}

TEST(Expansion, FieldPercentileKey) {
    // B is top of a crowded cohort; C is mid-table in its own cohort despite more citations.
    auto s = CitationStore::from_records({pub("A", 2000, 0), pub("B", 2001, 10, {"A"}, "t", "01"),
                                          pub("x1", 2001, 1, {}, "t", "01"), pub("x2", 2001, 2, {}, "t", "01"),
                                          pub("C", 2001, 50, {"A"}, "t", "02"), pub("y1", 2001, 100, {}, "t", "02")});
    EXPECT_EQ(forward_step(s, {"A"}, {"A"}, 1, SelectionKey::field_percentile), (IdSet{"B"}));
}

TEST(Expansion, ChainForwardTwoSteps) {
    auto t = run(chain(), {"A"}, forward(2));
    EXPECT_EQ(t.generations, (Gens{{"A"}, {"B"}, {"C"}}));
    EXPECT_EQ(t.stop_reason, StopReason::steps_exhausted);
    EXPECT_EQ(t.first_seen.at("C"), 2);
    EXPECT_EQ(t.edges, (std::vector<TraceEdge>{{"B", "A", 1}, {"C", "B", 2}}));
    EXPECT_TRUE(t.complete);
}

TEST(Expansion, EmptyFrontierStops) {
    auto t = run(chain(), {"C"}, forward(3));
    EXPECT_EQ(t.generations, (Gens{{"C"}}));
    EXPECT_EQ(t.stop_reason, StopReason::empty_frontier);
}

TEST(Expansion, YearFloorFiltersAndStops) {
    auto s = CitationStore::from_records(
        {pub("S", 2000, 1, {"M", "old"}), pub("M", 1960, 1, {"old2"}), pub("old", 1940, 9), pub("old2", 1945, 9)});
    auto spec = backward(5);
    spec.min_year = 1950;
    auto t = run(s, {"S"}, spec);
    EXPECT_EQ(t.generations, (Gens{{"S"}, {"M"}}));
    EXPECT_EQ(t.stop_reason, StopReason::year_floor);
    EXPECT_FALSE(t.all_ids().count("old"));
}

TEST(Expansion, HIndexCeiling) {
    std::vector<Publication> recs{pub("S", 2000, 5)};
    for (int i = 0; i < 6; ++i) recs.push_back(pub(gen::pid(i), 2001, 10, {"S"}));
    recs.push_back(pub("late", 2002, 10, {gen::pid(0)}));
    auto s = CitationStore::from_records(recs);
    auto spec = forward(5);
    spec.h_index_ceiling = 4;
    auto t = run(s, {"S"}, spec);
    EXPECT_EQ(t.generations.size(), 2u);
    EXPECT_EQ(t.stop_reason, StopReason::h_index_ceiling);
}

TEST(Expansion, PopulationCapTruncatesByRank) {
    std::vector<Publication> recs{pub("S", 2000, 5)};
    for (int i = 0; i < 6; ++i) recs.push_back(pub(gen::pid(i), 2001, i, {"S"}));
    auto s = CitationStore::from_records(recs);
    auto spec = forward(5);
    spec.max_population = 4;
    auto t = run(s, {"S"}, spec);
    EXPECT_EQ(t.generations, (Gens{{"S"}, {"p0003", "p0004", "p0005"}}));
    EXPECT_EQ(t.stop_reason, StopReason::population_cap);
    EXPECT_EQ(t.all_ids().size(), 4u);
}

TEST(Expansion, EdgesIncludeLinksToSeenNodes) {
    // C cites both A and B; B cites A.
    auto s = CitationStore::from_records({pub("A", 2000, 5), pub("B", 2001, 3, {"A"}), pub("C", 2002, 1, {"A", "B"})});
    auto t = run(s, {"A"}, forward(2));
    EXPECT_EQ(t.generations, (Gens{{"A"}, {"B", "C"}}));
    EXPECT_EQ(t.edges, (std::vector<TraceEdge>{{"B", "A", 1}, {"C", "A", 1}, {"C", "B", 2}}));
    EXPECT_EQ(t.stop_reason, StopReason::empty_frontier);
}

TEST(Expansion, BadInputs) {
    EXPECT_THROW(run(chain(), {}, forward(1)), UsageError);
    EXPECT_THROW(run(chain(), {"nope"}, forward(1)), DataError);
    EXPECT_THROW(run(chain(), {"A"}, forward(0)), UsageError);
    EXPECT_THROW(run(chain(), {"A"}, forward(1, 0)), UsageError);
}

TEST(ExpansionProperty, DualityOfSingleSteps) {
    gen::Rng rng(41);
    for (int round = 0; round < 20; ++round) {
        auto s = CitationStore::from_records(gen::corpus(rng, {rng.uniform(2, 300), 6, 0.0, 1990, 2020}));
        std::map<std::string, IdSet> fwd, back;
        for (const auto& [id, p] : s.records()) {
            fwd[id] = forward_step(s, {id}, {}, kUnlimited, SelectionKey::times_cited);
            back[id] = backward_step(s, {id}, {}, kUnlimited, SelectionKey::times_cited);
        }
        for (const auto& [a, pa] : s.records())
            for (const auto& [b, pb] : s.records()) ASSERT_EQ(fwd[a].count(b), back[b].count(a)) << a << " " << b;
    }
}

TEST(ExpansionProperty, GenerationsDisjointAndBounded) {
    gen::Rng rng(42);
    for (int round = 0; round < 60; ++round) {
        auto s = CitationStore::from_records(gen::corpus(rng, {rng.uniform(5, 200), 10, 0.05, 1990, 2020}));
        auto spec = forward(rng.uniform(1, 4), static_cast<std::size_t>(rng.uniform(1, 4)));
        if (rng.chance(0.5)) spec.direction = Direction::backward;
        IdSet seeds{gen::pid(0), gen::pid(rng.uniform(0, 4))};
        auto t = run(s, seeds, spec);
        std::set<std::string> all;
        std::size_t total = 0;
        for (std::size_t g = 0; g < t.generations.size(); ++g) {
            ASSERT_TRUE(std::is_sorted(t.generations[g].begin(), t.generations[g].end()));
            for (const auto& id : t.generations[g]) {
                ASSERT_TRUE(all.insert(id).second) << "duplicate " << id;
                ASSERT_EQ(t.first_seen.at(id), static_cast<int>(g));
            }
            total += t.generations[g].size();
        }
        double bound = 0, pow = 1;
        for (int i = 1; i <= spec.max_steps; ++i) bound += (pow *= static_cast<double>(spec.per_article_limit));
        ASSERT_LE(static_cast<double>(total - seeds.size()), static_cast<double>(seeds.size()) * bound);
        ASSERT_EQ(run(s, seeds, spec), t);
    }
}

TEST(ExpansionRemote, MatchesLocalRun) {
    gen::Rng rng(43);
    for (int round = 0; round < 10; ++round) {
        auto s = CitationStore::from_records(gen::corpus(rng, {rng.uniform(5, 120), 8, 0.1, 1990, 2020}));
        auto spec = forward(rng.uniform(1, 3), static_cast<std::size_t>(rng.uniform(1, 5)));
        if (round % 2) spec.direction = Direction::backward;
        if (round % 3 == 0) spec.min_year = 2000;
        IdSet seeds{gen::pid(0), gen::pid(1)};
        auto local = run(s, seeds, spec);
        auto client = store_client(s, 7);
        auto remote = run_remote(client, seeds, spec);
        ASSERT_EQ(remote.trace, local);
        for (const auto& p : remote.records) ASSERT_EQ(p, s.at(p.id));
    }
}

TEST(ExpansionRemote, ChainThroughReplayArchive) {
    auto s = chain();
    auto dir = std::filesystem::temp_directory_path() / "cascade-chain-archive.jsonl";
    fetch::SourceConfig cfg;
    cfg.retry = {1, 0};
    {
        fetch::Client rec(cfg, std::make_unique<fetch::RecordingTransport>(std::make_unique<fetch::StoreTransport>(s),
                                                                            dir.string()));
        run_remote(rec, {"A"}, forward(2));
    }
    fetch::Client replay(cfg, std::make_unique<fetch::ReplayTransport>(fetch::FixtureArchive::load(dir.string())));
    auto r = run_remote(replay, {"A"}, forward(2));
    EXPECT_EQ(r.trace, run(s, {"A"}, forward(2)));
    EXPECT_EQ(r.records.size(), 3u);
    std::filesystem::remove(dir);
}

TEST(ExpansionRemote, NoCitersGivesSingleGeneration) {
    auto s = CitationStore::from_records({pub("lonely", 2000, 0)});
    auto client = store_client(s);
    auto r = run_remote(client, {"lonely"}, forward(3));
    EXPECT_EQ(r.trace.generations, (Gens{{"lonely"}}));
    EXPECT_EQ(r.trace.stop_reason, StopReason::empty_frontier);
}

TEST(ExpansionRemote, FailureKeepsPartialTrace) {
    auto s = chain();
    fetch::SourceConfig cfg;
    cfg.retry = {2, 0};
    // Requests: seed lookup, citers of A, then citers of B fails.
    fetch::Client client(cfg, std::make_unique<FailingTransport>(s, 2));
    try {
        run_remote(client, {"A"}, forward(3));
        FAIL();
    } catch (const IncompleteExpansion& e) {
        EXPECT_EQ(e.partial.trace.generations, (Gens{{"A"}, {"B"}}));
        EXPECT_FALSE(e.partial.trace.complete);
        EXPECT_FALSE(e.partial.trace.error.empty());
        EXPECT_EQ(e.partial.records.size(), 2u);
    }
}
