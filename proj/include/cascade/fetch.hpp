#pragma once
// Paged retrieval from a DSL endpoint. Transports are pluggable: live HTTP
// (http.hpp), replay from a recorded archive, recording wrapper, and an
// in-process transport that answers from a local CitationStore.

#include "cascade/corpus.hpp"
#include "cascade/dsl.hpp"

#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace cascade::fetch {

enum class Mode { live, replay, record };

struct RetryPolicy {
    int max_attempts = 3;
    int backoff_ms = 250;
};

struct SourceConfig {
    std::string endpoint_url;
    std::optional<std::string> auth_token;
    int page_limit = dsl::kMaxLimit;
    std::optional<std::size_t> max_records;
    RetryPolicy retry;
    Mode mode = Mode::live;
    std::string fixture_path; // archive for replay/record

    void check() const {
        if (page_limit < 1 || page_limit > dsl::kMaxLimit)
            throw UsageError("page_limit must be in [1, " + std::to_string(dsl::kMaxLimit) + "]");
        if (retry.max_attempts < 1) throw UsageError("retry.max_attempts must be >= 1");
        if (retry.backoff_ms < 0) throw UsageError("retry.backoff_ms must be >= 0");
    }
};

struct FetchError : DataError {
    using DataError::DataError;
};

// Connection-level failure; retried.
struct TransportError : FetchError {
    using FetchError::FetchError;
};

struct PageRequest {
    std::string query; // canonical query text with the page size, skip excluded
    std::int64_t skip = 0;
    std::string body;  // what goes over the wire
};

struct RawResponse {
    int status = 0;
    std::string body;
    bool operator==(const RawResponse&) const = default;
};

class Transport {
public:
    virtual ~Transport() = default;
    virtual RawResponse post(const PageRequest& req) = 0;
};

// ---------------------------------------------------------------------------
// Fixture archive: JSONL of {query, skip, status, body}

class FixtureArchive {
public:
    using Key = std::pair<std::string, std::int64_t>;

    static FixtureArchive load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot read fixture archive '" + path + "'");
        FixtureArchive a;
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
            ++n;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                Json j = Json::parse(line);
                a.put(j.at("query").get<std::string>(), j.at("skip").get<std::int64_t>(),
                      {j.at("status").get<int>(), j.at("body").get<std::string>()});
            } catch (const Json::exception& e) {
                throw DataError("fixture archive '" + path + "' line " + std::to_string(n) + ": " + e.what());
            }
        }
        return a;
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw DataError("cannot write fixture archive '" + path + "'");
        for (const auto& [key, resp] : entries_) {
            Json j = Json::object();
            j["query"] = key.first;
            j["skip"] = key.second;
            j["status"] = resp.status;
            j["body"] = resp.body;
            out << j.dump() << '\n';
        }
    }

    void put(std::string query, std::int64_t skip, RawResponse resp) {
        entries_[{std::move(query), skip}] = std::move(resp);
    }

    const RawResponse* get(const std::string& query, std::int64_t skip) const {
        auto it = entries_.find({query, skip});
        return it == entries_.end() ? nullptr : &it->second;
    }

    std::size_t size() const { return entries_.size(); }
    const std::map<Key, RawResponse>& entries() const { return entries_; }

private:
    std::map<Key, RawResponse> entries_;
};

class ReplayTransport : public Transport {
public:
    explicit ReplayTransport(FixtureArchive archive) : archive_(std::move(archive)) {}

    RawResponse post(const PageRequest& req) override {
        const RawResponse* r = archive_.get(req.query, req.skip);
        if (!r) throw FetchError("replay archive has no entry for skip " + std::to_string(req.skip) + " of query: " + req.query);
        return *r;
    }

private:
    FixtureArchive archive_;
};

class RecordingTransport : public Transport {
public:
    RecordingTransport(std::unique_ptr<Transport> inner, std::string path)
        : inner_(std::move(inner)), path_(std::move(path)) {}

    RawResponse post(const PageRequest& req) override {
        RawResponse r = inner_->post(req);
        archive_.put(req.query, req.skip, r);
        archive_.save(path_);
        return r;
    }

    const FixtureArchive& archive() const { return archive_; }

private:
    std::unique_ptr<Transport> inner_;
    std::string path_;
    FixtureArchive archive_;
};

// Answers DSL requests from a local store, the way the remote service would.
class StoreTransport : public Transport {
public:
    explicit StoreTransport(const CitationStore& store) : store_(&store) {}

    RawResponse post(const PageRequest& req) override { return answer(*store_, req.body); }

    static RawResponse answer(const CitationStore& store, const std::string& body) {
        try {
            return {200, dsl::to_json(dsl::evaluate(store, dsl::parse(body))).dump()};
        } catch (const UsageError& e) {
            return {400, Json{{"error", e.what()}}.dump()};
        }
    }

private:
    const CitationStore* store_;
};

// ---------------------------------------------------------------------------
// Response decoding

inline dsl::ResultPage parse_response(const std::string& body) {
    Json j;
    try {
        j = Json::parse(body);
    } catch (const Json::exception&) {
        throw FetchError("malformed response body at /: not JSON");
    }
    auto bad = [](const std::string& path, const char* what) {
        throw FetchError("malformed response body at " + path + ": " + what);
    };
    if (!j.is_object()) bad("/", "expected object");
    auto items = j.find("items");
    if (items == j.end() || !items->is_object()) bad("/items", "expected object");
    auto pubs = items->find("publications");
    if (pubs == items->end() || !pubs->is_array()) bad("/items/publications", "expected array");
    auto stats = j.find("_stats");
    if (stats == j.end() || !stats->is_object()) bad("/_stats", "expected object");
    auto total = stats->find("total_count");
    if (total == stats->end() || !total->is_number_integer() || total->get<std::int64_t>() < 0)
        bad("/_stats/total_count", "expected nonnegative integer");

    dsl::ResultPage page;
    page.total_count = total->get<std::int64_t>();
    for (std::size_t i = 0; i < pubs->size(); ++i) {
        if (!(*pubs)[i].is_object()) bad("/items/publications/" + std::to_string(i), "expected object");
        page.items.push_back((*pubs)[i]);
    }
    return page;
}

// ---------------------------------------------------------------------------
// Client

struct FetchResult {
    std::vector<Publication> records;
    std::int64_t total_count = 0;
    std::size_t requests = 0;
    std::size_t duplicates_dropped = 0;
    bool truncated = false; // max_records cap cut the result short
};

class Client {
public:
    Client(SourceConfig cfg, std::unique_ptr<Transport> transport)
        : cfg_(std::move(cfg)), transport_(std::move(transport)) {
        cfg_.check();
    }

    const SourceConfig& config() const { return cfg_; }

    dsl::ResultPage request_page(const dsl::Query& q, std::int64_t skip) {
        if (skip < 0) throw UsageError("skip must be nonnegative");
        dsl::Query keyed = q;
        keyed.limit = cfg_.page_limit;
        keyed.skip = 0;
        PageRequest req{dsl::format(keyed), skip, dsl::format_paged(q, cfg_.page_limit, skip)};

        std::string last_error;
        for (int attempt = 1; attempt <= cfg_.retry.max_attempts; ++attempt) {
            if (attempt > 1 && cfg_.retry.backoff_ms > 0)
                std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.retry.backoff_ms << (attempt - 2)));
            RawResponse r;
            try {
                r = transport_->post(req);
            } catch (const TransportError& e) {
                last_error = e.what();
                continue;
            }
            if (r.status == 429 || r.status >= 500) {
                last_error = "status " + std::to_string(r.status);
                continue;
            }
            if (r.status < 200 || r.status >= 300)
                throw FetchError("request failed with status " + std::to_string(r.status) + ": " + r.body.substr(0, 200));
            return parse_response(r.body);
        }
        throw FetchError("request failed after " + std::to_string(cfg_.retry.max_attempts) + " attempts (" + last_error + ")");
    }

    // Walks pages skip = 0, L, 2L, ... and keeps the first occurrence of each id.
    FetchResult fetch_all(const dsl::Query& q) {
        FetchResult out;
        std::set<std::string> seen;
        std::optional<std::int64_t> total;
        std::int64_t skip = 0;
        for (;;) {
            if (cfg_.max_records && out.records.size() >= *cfg_.max_records) {
                out.truncated = true;
                break;
            }
            dsl::ResultPage page = request_page(q, skip);
            ++out.requests;
            if (total && page.total_count != *total)
                throw FetchError("total_count changed from " + std::to_string(*total) + " to " +
                                 std::to_string(page.total_count) + " at skip " + std::to_string(skip));
            total = page.total_count;
            if (page.items.empty()) break;
            for (std::size_t i = 0; i < page.items.size(); ++i) {
                Publication p;
                try {
                    p = corpus::publication_from_json(page.items[i]);
                } catch (const DataError& e) {
                    throw FetchError("malformed record at /items/publications/" + std::to_string(i) + " (skip " +
                                     std::to_string(skip) + "): " + e.what());
                }
                if (!seen.insert(p.id).second) {
                    ++out.duplicates_dropped;
                    continue;
                }
                if (cfg_.max_records && out.records.size() >= *cfg_.max_records) {
                    out.truncated = true;
                    break;
                }
                out.records.push_back(std::move(p));
            }
            if (out.truncated) break;
            skip += cfg_.page_limit;
            if (skip >= *total) break;
        }
        out.total_count = total.value_or(0);
        return out;
    }

private:
    SourceConfig cfg_;
    std::unique_ptr<Transport> transport_;
};

// `search publications where references = "<id>" return publications[all]`
inline dsl::Query citing_query_for(const std::string& id) {
    if (id.empty()) throw UsageError("citing_query_for: empty id");
    dsl::Query q;
    q.predicates.push_back({"references", dsl::Op::eq, id});
    return q;
}

// Record lookup by id list.
inline dsl::Query records_query_for(const std::vector<std::string>& ids) {
    dsl::Query q;
    q.predicates.push_back({"id", dsl::Op::in_set, ids});
    return q;
}

} // namespace cascade::fetch
