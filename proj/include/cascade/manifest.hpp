#pragma once
// Run manifests: what ran, with which configuration, over which bytes.

#include "cascade/corpus.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace cascade::manifest {

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read '" + path + "' for digest");
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
    std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunManifest {
    std::vector<std::string> command_line;
    Json config = Json::object();
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::chrono::system_clock::time_point started = std::chrono::system_clock::now();
    std::string tool_version = CASCADE_VERSION;

    Json to_json() const {
        Json j = Json::object();
        j["schema_version"] = 1;
        j["kind"] = "manifest";
        j["tool_version"] = tool_version;
        j["command_line"] = command_line;
        j["config"] = config;
        auto digests = [](const std::vector<std::string>& paths) {
            Json a = Json::array();
            for (const auto& p : paths) a.push_back(Json{{"path", p}, {"sha256", file_digest(p)}});
            return a;
        };
        j["inputs"] = digests(inputs);
        j["outputs"] = digests(outputs);
        j["started"] = utc_timestamp(started);
        j["finished"] = utc_timestamp(std::chrono::system_clock::now());
        return j;
    }
};

} // namespace cascade::manifest
