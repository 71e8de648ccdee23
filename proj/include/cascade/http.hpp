#pragma once
// Live HTTP transport and client construction from a SourceConfig.
// Kept apart from fetch.hpp so most translation units skip httplib.

#include "cascade/fetch.hpp"
#include "httplib.h"

#include <memory>
#include <string>

namespace cascade::fetch {

// POST <endpoint> with the DSL text as body and an optional bearer token.
class HttpTransport : public Transport {
public:
    HttpTransport(const std::string& endpoint_url, std::optional<std::string> token, int timeout_s = 120)
        : token_(std::move(token)), timeout_s_(timeout_s) {
        auto scheme = endpoint_url.find("://");
        if (scheme == std::string::npos) throw UsageError("endpoint URL needs a scheme: '" + endpoint_url + "'");
        auto slash = endpoint_url.find('/', scheme + 3);
        base_ = endpoint_url.substr(0, slash);
        path_ = slash == std::string::npos ? "/" : endpoint_url.substr(slash);
    }

    RawResponse post(const PageRequest& req) override {
        httplib::Client cli(base_);
        cli.set_connection_timeout(timeout_s_, 0);
        cli.set_read_timeout(timeout_s_, 0);
        httplib::Headers headers{{"Accept", "application/json"}};
        if (token_) headers.emplace("Authorization", "Bearer " + *token_);
        auto res = cli.Post(path_, headers, req.body, "text/plain");
        if (!res) throw TransportError("POST " + base_ + path_ + " failed: " + httplib::to_string(res.error()));
        return {res->status, res->body};
    }

private:
    std::string base_;
    std::string path_;
    std::optional<std::string> token_;
    int timeout_s_;
};

inline Client make_client(const SourceConfig& cfg) {
    cfg.check();
    switch (cfg.mode) {
    case Mode::replay:
        return Client(cfg, std::make_unique<ReplayTransport>(FixtureArchive::load(cfg.fixture_path)));
    case Mode::record:
        return Client(cfg, std::make_unique<RecordingTransport>(
                               std::make_unique<HttpTransport>(cfg.endpoint_url, cfg.auth_token), cfg.fixture_path));
    case Mode::live:
        break;
    }
    return Client(cfg, std::make_unique<HttpTransport>(cfg.endpoint_url, cfg.auth_token));
}

} // namespace cascade::fetch
