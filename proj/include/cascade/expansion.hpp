#pragma once
// Cascading forward/backward citation expansion.
//
// A run starts from generation 0 (the seeds) and applies one expansion step
// per generation. Each frontier article contributes at most L new articles,
// picked by a selection key (descending, id ascending on ties). Generations
// are disjoint; an article keeps the generation it was first reached in.

#include "cascade/corpus.hpp"
#include "cascade/fetch.hpp"
#include "cascade/metrics.hpp"

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cascade::expand {

enum class Direction { forward, backward };
enum class SelectionKey { times_cited, altmetric, rcr, field_percentile };
enum class StopReason { steps_exhausted, empty_frontier, year_floor, h_index_ceiling, population_cap };

inline constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

struct ExpansionSpec {
    Direction direction = Direction::forward;
    int max_steps = 1;
    std::size_t per_article_limit = 10;
    SelectionKey key = SelectionKey::times_cited;
    std::optional<int> min_year;
    std::optional<std::int64_t> h_index_ceiling;
    std::optional<std::size_t> max_population;
    bool exclude_stubs = false; // backward only: drop unresolved references from ranking

    void check() const {
        if (max_steps < 1) throw UsageError("max_steps must be >= 1");
        if (per_article_limit < 1) throw UsageError("per_article_limit must be >= 1");
        if (max_population && *max_population < 1) throw UsageError("max_population must be >= 1");
    }
};

struct TraceEdge {
    std::string citing;
    std::string cited;
    int generation = 0;
    auto operator<=>(const TraceEdge&) const = default;
    bool operator==(const TraceEdge&) const = default;
};

struct ExpansionTrace {
    std::vector<std::vector<std::string>> generations; // each sorted
    std::map<std::string, int> first_seen;
    std::vector<TraceEdge> edges;
    StopReason stop_reason = StopReason::steps_exhausted;
    bool complete = true;
    std::string error; // set when complete == false

    IdSet all_ids() const {
        IdSet out;
        for (const auto& g : generations) out.insert(g.begin(), g.end());
        return out;
    }

    bool operator==(const ExpansionTrace&) const = default;
};

// ---------------------------------------------------------------------------
// Views

template <class V>
concept CitationView = requires(V& v, const std::string& id, const std::vector<std::string>& ids, SelectionKey k) {
    { v.citers(id) } -> std::convertible_to<std::vector<std::string>>;
    { v.references(id) } -> std::convertible_to<std::vector<std::string>>;
    { v.record(id) } -> std::same_as<const Publication*>;
    { v.selection_value(id, k) } -> std::convertible_to<double>;
    v.resolve(ids);
};

class StoreView {
public:
    explicit StoreView(const CitationStore& store) : store_(&store) {}

    std::vector<std::string> citers(const std::string& id) const {
        const auto& s = store_->citing_of(id);
        return {s.begin(), s.end()};
    }
    std::vector<std::string> references(const std::string& id) const {
        const Publication* p = store_->find(id);
        return p ? p->reference_ids : std::vector<std::string>{};
    }
    const Publication* record(const std::string& id) const { return store_->find(id); }
    void resolve(const std::vector<std::string>&) const {}

    double selection_value(const std::string& id, SelectionKey key) const {
        const Publication* p = store_->find(id);
        if (!p) return 0.0;
        switch (key) {
        case SelectionKey::times_cited: return static_cast<double>(p->times_cited);
        case SelectionKey::altmetric: return static_cast<double>(p->altmetric.value_or(0));
        case SelectionKey::rcr: return p->rcr.value_or(0.0);
        case SelectionKey::field_percentile: {
            const auto* cohort = store_->cohort_of(*p);
            return cohort ? metrics::percentile_in(*cohort, p->times_cited) : 0.0;
        }
        }
        return 0.0;
    }

private:
    const CitationStore* store_;
};

// Materializes records on demand through a fetch client.
class RemoteView {
public:
    explicit RemoteView(fetch::Client& client) : client_(&client) {}

    std::vector<std::string> citers(const std::string& id) {
        auto hit = citers_.find(id);
        if (hit != citers_.end()) return hit->second;
        auto result = client_->fetch_all(fetch::citing_query_for(id));
        std::vector<std::string> ids;
        for (auto& p : result.records) {
            if (p.id == id) continue;
            ids.push_back(p.id);
            remember(std::move(p));
        }
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        citers_[id] = ids;
        return ids;
    }

    std::vector<std::string> references(const std::string& id) const {
        const Publication* p = record(id);
        return p ? p->reference_ids : std::vector<std::string>{};
    }

    const Publication* record(const std::string& id) const {
        auto it = cache_.find(id);
        return it == cache_.end() ? nullptr : &it->second;
    }

    void resolve(const std::vector<std::string>& ids) {
        std::vector<std::string> todo;
        for (const auto& id : ids)
            if (!cache_.count(id) && !missing_.count(id)) todo.push_back(id);
        std::sort(todo.begin(), todo.end());
        todo.erase(std::unique(todo.begin(), todo.end()), todo.end());
        constexpr std::size_t kChunk = 400;
        for (std::size_t b = 0; b < todo.size(); b += kChunk) {
            std::vector<std::string> chunk(todo.begin() + static_cast<std::ptrdiff_t>(b),
                                           todo.begin() + static_cast<std::ptrdiff_t>(std::min(todo.size(), b + kChunk)));
            auto result = client_->fetch_all(fetch::records_query_for(chunk));
            for (auto& p : result.records) remember(std::move(p));
            for (const auto& id : chunk)
                if (!cache_.count(id)) missing_.insert(id);
        }
    }

    double selection_value(const std::string& id, SelectionKey key) const {
        const Publication* p = record(id);
        if (!p) return 0.0;
        switch (key) {
        case SelectionKey::times_cited: return static_cast<double>(p->times_cited);
        case SelectionKey::altmetric: return static_cast<double>(p->altmetric.value_or(0));
        case SelectionKey::rcr: return p->rcr.value_or(0.0);
        case SelectionKey::field_percentile: break;
        }
        throw UsageError("field_percentile selection needs a local store");
    }

    // Every record materialized so far, in id order.
    std::vector<Publication> fetched() const {
        std::vector<Publication> out;
        out.reserve(cache_.size());
        for (const auto& [id, p] : cache_) out.push_back(p);
        return out;
    }

private:
    void remember(Publication p) {
        std::string id = p.id;
        missing_.erase(id);
        cache_.try_emplace(std::move(id), std::move(p));
    }

    fetch::Client* client_;
    std::map<std::string, Publication> cache_;
    std::set<std::string> missing_;
    std::map<std::string, std::vector<std::string>> citers_;
};

// ---------------------------------------------------------------------------
// Steps

struct StepResult {
    IdSet selected;
    // (frontier article, neighbour) for every selected or already-seen neighbour
    std::vector<std::pair<std::string, std::string>> links;
};

template <CitationView V>
void rank_by_key(V& view, std::vector<std::string>& ids, SelectionKey key) {
    std::vector<std::pair<double, std::string>> keyed;
    keyed.reserve(ids.size());
    for (auto& id : ids) keyed.emplace_back(view.selection_value(id, key), std::move(id));
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    ids.clear();
    for (auto& [v, id] : keyed) ids.push_back(std::move(id));
}

template <CitationView V>
StepResult step(V& view, const IdSet& frontier, const IdSet& seen, std::size_t limit, SelectionKey key,
                Direction dir, bool exclude_stubs = false) {
    StepResult out;
    for (const auto& a : frontier) {
        std::vector<std::string> nbrs = dir == Direction::forward ? view.citers(a) : view.references(a);
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
        if (dir == Direction::backward) view.resolve(nbrs);

        std::vector<std::string> pool;
        for (auto& n : nbrs) {
            if (n == a) continue;
            if (seen.count(n)) {
                out.links.emplace_back(a, n);
            } else if (!(exclude_stubs && view.record(n) == nullptr)) {
                pool.push_back(std::move(n));
            }
        }
        rank_by_key(view, pool, key);
        if (pool.size() > limit) pool.resize(limit);
        for (auto& n : pool) {
            out.links.emplace_back(a, n);
            out.selected.insert(std::move(n));
        }
    }
    return out;
}

inline IdSet forward_step(const CitationStore& store, const IdSet& frontier, const IdSet& seen, std::size_t limit,
                          SelectionKey key = SelectionKey::times_cited) {
    StoreView v(store);
    return step(v, frontier, seen, limit, key, Direction::forward).selected;
}

inline IdSet backward_step(const CitationStore& store, const IdSet& frontier, const IdSet& seen, std::size_t limit,
                           SelectionKey key = SelectionKey::times_cited, bool exclude_stubs = false) {
    StoreView v(store);
    return step(v, frontier, seen, limit, key, Direction::backward, exclude_stubs).selected;
}

// ---------------------------------------------------------------------------
// Runs

namespace detail {

template <CitationView V>
std::int64_t accumulated_h_index(V& view, const IdSet& ids) {
    std::vector<std::int64_t> cites;
    cites.reserve(ids.size());
    for (const auto& id : ids) {
        const Publication* p = view.record(id);
        cites.push_back(p ? p->times_cited : 0);
    }
    return metrics::h_index(cites);
}

// Fills `trace` generation by generation so a failure leaves a valid prefix.
template <CitationView V>
void run_into(V& view, const IdSet& seeds, const ExpansionSpec& spec, ExpansionTrace& trace) {
    spec.check();
    if (seeds.empty()) throw UsageError("expansion needs at least one seed");
    view.resolve(std::vector<std::string>(seeds.begin(), seeds.end()));
    for (const auto& s : seeds)
        if (!view.record(s)) throw DataError("unknown seed id '" + s + "'");

    trace.generations.emplace_back(seeds.begin(), seeds.end());
    for (const auto& s : seeds) trace.first_seen[s] = 0;
    IdSet seen = seeds;
    IdSet frontier = seeds;
    if (spec.max_population && seen.size() >= *spec.max_population) {
        trace.stop_reason = StopReason::population_cap;
        return;
    }

    for (int gen = 1; gen <= spec.max_steps; ++gen) {
        StepResult r = step(view, frontier, seen, spec.per_article_limit, spec.key, spec.direction, spec.exclude_stubs);
        IdSet next = std::move(r.selected);

        bool floored = false;
        if (spec.min_year) {
            for (auto it = next.begin(); it != next.end();) {
                const Publication* p = view.record(*it);
                if (p && p->year && *p->year < *spec.min_year) {
                    it = next.erase(it);
                    floored = true;
                } else {
                    ++it;
                }
            }
        }

        bool capped = false;
        if (spec.max_population && seen.size() + next.size() >= *spec.max_population) {
            std::vector<std::string> ranked(next.begin(), next.end());
            rank_by_key(view, ranked, spec.key);
            ranked.resize(*spec.max_population - seen.size());
            next = IdSet(ranked.begin(), ranked.end());
            capped = true;
        }

        for (const auto& [a, n] : r.links) {
            if (!seen.count(n) && !next.count(n)) continue;
            if (spec.direction == Direction::forward) trace.edges.push_back({n, a, gen});
            else trace.edges.push_back({a, n, gen});
        }

        if (next.empty()) {
            trace.stop_reason = floored ? StopReason::year_floor : StopReason::empty_frontier;
            break;
        }
        trace.generations.emplace_back(next.begin(), next.end());
        for (const auto& id : next) trace.first_seen.emplace(id, gen);
        seen.insert(next.begin(), next.end());
        frontier = std::move(next);

        if (capped) {
            trace.stop_reason = StopReason::population_cap;
            break;
        }
        if (spec.h_index_ceiling && accumulated_h_index(view, seen) > *spec.h_index_ceiling) {
            trace.stop_reason = StopReason::h_index_ceiling;
            break;
        }
        trace.stop_reason = StopReason::steps_exhausted;
    }

    // A link can be met again from the other side in a later generation.
    std::vector<TraceEdge> unique;
    std::set<std::pair<std::string, std::string>> met;
    for (auto& e : trace.edges)
        if (met.emplace(e.citing, e.cited).second) unique.push_back(std::move(e));
    std::sort(unique.begin(), unique.end());
    trace.edges = std::move(unique);
}

} // namespace detail

template <CitationView V>
ExpansionTrace run(V& view, const IdSet& seeds, const ExpansionSpec& spec) {
    ExpansionTrace trace;
    detail::run_into(view, seeds, spec, trace);
    return trace;
}

inline ExpansionTrace run(const CitationStore& store, const IdSet& seeds, const ExpansionSpec& spec) {
    StoreView v(store);
    return run(v, seeds, spec);
}

struct RemoteRun {
    ExpansionTrace trace;
    std::vector<Publication> records;
};

// A fetch failure mid-run; carries the generations completed so far.
struct IncompleteExpansion : fetch::FetchError {
    IncompleteExpansion(const std::string& msg, RemoteRun partial)
        : fetch::FetchError("expansion incomplete: " + msg), partial(std::move(partial)) {}
    RemoteRun partial;
};

inline RemoteRun run_remote(fetch::Client& client, const IdSet& seeds, const ExpansionSpec& spec) {
    RemoteView view(client);
    RemoteRun out;
    try {
        detail::run_into(view, seeds, spec, out.trace);
    } catch (const fetch::FetchError& e) {
        out.trace.complete = false;
        out.trace.error = e.what();
        out.records = view.fetched();
        throw IncompleteExpansion(e.what(), std::move(out));
    }
    out.records = view.fetched();
    return out;
}

} // namespace cascade::expand
