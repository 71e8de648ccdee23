#pragma once
// Publication records, JSONL ingestion and the bidirectional citation index.

#include "cascade/error.hpp"
#include "json.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cascade {

using Json = nlohmann::ordered_json;
using IdSet = std::set<std::string>;

namespace corpus {

inline constexpr int kMinYear = 1800;
inline constexpr int kMaxYear = 2100;

struct ForCode {
    std::string code;
    std::string name;
    bool operator==(const ForCode&) const = default;
};

struct Venue {
    std::string journal_title;
    std::vector<std::string> issn;
    bool operator==(const Venue&) const = default;
};

struct Publication {
    std::string id;
    std::optional<std::string> doi;
    std::string title;
    std::optional<int> year;
    Venue venue;
    std::vector<ForCode> for_fields;
    std::int64_t times_cited = 0;
    std::optional<std::int64_t> altmetric;
    std::optional<double> rcr;
    std::vector<std::string> reference_ids;
    std::vector<std::string> authors;

    // First FOR entry is the primary field of research.
    const ForCode* primary_field() const {
        return for_fields.empty() ? nullptr : &for_fields.front();
    }

    bool operator==(const Publication&) const = default;
};

enum class IssueKind {
    missing_year,
    missing_title,
    dangling_reference,
    duplicate_id,
    self_reference,
    duplicate_reference,
};

inline std::string_view to_string(IssueKind k) {
    switch (k) {
    case IssueKind::missing_year: return "missing_year";
    case IssueKind::missing_title: return "missing_title";
    case IssueKind::dangling_reference: return "dangling_reference";
    case IssueKind::duplicate_id: return "duplicate_id";
    case IssueKind::self_reference: return "self_reference";
    case IssueKind::duplicate_reference: return "duplicate_reference";
    }
    return "unknown";
}

// detail carries: the offending year text (missing_year), the target id
// (dangling_reference, self_reference, duplicate_reference), or the input
// position of the dropped duplicate (duplicate_id). Empty for missing_title.
struct ValidationIssue {
    std::string record_id;
    IssueKind kind;
    std::string detail;

    auto operator<=>(const ValidationIssue&) const = default;
    bool operator==(const ValidationIssue&) const = default;
};

struct MalformedLine {
    std::size_t line = 0;
    std::string message;
    bool operator==(const MalformedLine&) const = default;
};

using CohortKey = std::pair<std::string, int>;

// ---------------------------------------------------------------------------
// JSON mapping

namespace detail {

[[noreturn]] inline void bad_field(std::string_view field, std::string_view expected) {
    throw DataError("field '" + std::string(field) + "': expected " + std::string(expected));
}

inline const Json* member(const Json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return nullptr;
    return &*it;
}

inline std::vector<std::string> string_list(const Json& obj, const char* key, std::string_view path) {
    std::vector<std::string> out;
    const Json* v = member(obj, key);
    if (!v) return out;
    if (!v->is_array()) bad_field(path, "array of strings");
    out.reserve(v->size());
    for (const auto& e : *v) {
        if (!e.is_string()) bad_field(path, "array of strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

inline std::optional<std::int64_t> count_field(const Json& obj, const char* key) {
    const Json* v = member(obj, key);
    if (!v) return std::nullopt;
    if (v->is_number_unsigned()) return static_cast<std::int64_t>(v->get<std::uint64_t>());
    if (v->is_number_integer()) {
        auto x = v->get<std::int64_t>();
        if (x < 0) bad_field(key, "nonnegative integer");
        return x;
    }
    // Some sources emit integral floats ("554.0").
    if (v->is_number_float()) {
        double d = v->get<double>();
        if (d >= 0 && d == static_cast<double>(static_cast<std::int64_t>(d)))
            return static_cast<std::int64_t>(d);
    }
    bad_field(key, "nonnegative integer");
}

} // namespace detail

inline Publication publication_from_json(const Json& j) {
    using detail::bad_field;
    using detail::member;
    if (!j.is_object()) throw DataError("record is not a JSON object");

    Publication p;
    const Json* id = member(j, "id");
    if (!id || !id->is_string() || id->get_ref<const std::string&>().empty())
        bad_field("id", "nonempty string");
    p.id = id->get<std::string>();

    if (const Json* v = member(j, "doi")) {
        if (!v->is_string()) bad_field("doi", "string");
        p.doi = v->get<std::string>();
    }
    if (const Json* v = member(j, "title")) {
        if (!v->is_string()) bad_field("title", "string");
        p.title = v->get<std::string>();
    }
    if (const Json* v = member(j, "year")) {
        if (!v->is_number_integer()) bad_field("year", "integer");
        p.year = v->get<int>();
    }
    if (const Json* v = member(j, "journal")) {
        if (!v->is_object()) bad_field("journal", "object");
        if (const Json* t = member(*v, "title")) {
            if (!t->is_string()) bad_field("journal.title", "string");
            p.venue.journal_title = t->get<std::string>();
        }
        p.venue.issn = detail::string_list(*v, "issn", "journal.issn");
    }
    if (const Json* v = member(j, "FOR")) {
        if (!v->is_array()) bad_field("FOR", "array of {code,name}");
        for (const auto& e : *v) {
            if (!e.is_object()) bad_field("FOR", "array of {code,name}");
            ForCode f;
            if (const Json* c = member(e, "code")) {
                if (!c->is_string()) bad_field("FOR.code", "string");
                f.code = c->get<std::string>();
            }
            if (const Json* n = member(e, "name")) {
                if (!n->is_string()) bad_field("FOR.name", "string");
                f.name = n->get<std::string>();
            }
            p.for_fields.push_back(std::move(f));
        }
    }
    p.times_cited = detail::count_field(j, "times_cited").value_or(0);
    p.altmetric = detail::count_field(j, "altmetric");
    if (const Json* v = member(j, "relative_citation_ratio")) {
        if (!v->is_number() || v->get<double>() < 0) bad_field("relative_citation_ratio", "nonnegative number");
        p.rcr = v->get<double>();
    }
    p.reference_ids = detail::string_list(j, "reference_ids", "reference_ids");
    p.authors = detail::string_list(j, "authors", "authors");
    return p;
}

inline Json to_json(const Publication& p) {
    Json j = Json::object();
    j["id"] = p.id;
    j["doi"] = p.doi ? Json(*p.doi) : Json(nullptr);
    j["title"] = p.title;
    j["year"] = p.year ? Json(*p.year) : Json(nullptr);
    j["journal"] = Json{{"title", p.venue.journal_title}, {"issn", p.venue.issn}};
    Json fors = Json::array();
    for (const auto& f : p.for_fields) fors.push_back(Json{{"code", f.code}, {"name", f.name}});
    j["FOR"] = std::move(fors);
    j["times_cited"] = p.times_cited;
    j["altmetric"] = p.altmetric ? Json(*p.altmetric) : Json(nullptr);
    j["relative_citation_ratio"] = p.rcr ? Json(*p.rcr) : Json(nullptr);
    j["reference_ids"] = p.reference_ids;
    j["authors"] = p.authors;
    return j;
}

inline void write_jsonl(std::ostream& os, const std::vector<Publication>& records) {
    for (const auto& p : records) os << to_json(p).dump() << '\n';
}

// ---------------------------------------------------------------------------
// CitationStore

class CitationStore {
public:
    CitationStore() = default;

    // Builds the indexes. Records missing a usable year are quarantined;
    // self references and repeated reference entries are dropped.
    static CitationStore from_records(std::vector<Publication> input,
                                      std::vector<MalformedLine> malformed = {}) {
        CitationStore s;
        s.malformed_ = std::move(malformed);

        std::size_t position = 0;
        for (auto& p : input) {
            ++position;
            if (p.id.empty()) throw DataError("record at position " + std::to_string(position) + " has an empty id");
            if (s.records_.count(p.id)) {
                s.issues_.push_back({p.id, IssueKind::duplicate_id, "position " + std::to_string(position)});
                continue;
            }
            if (!p.year || *p.year < kMinYear || *p.year > kMaxYear) {
                s.issues_.push_back({p.id, IssueKind::missing_year, p.year ? std::to_string(*p.year) : "absent"});
                s.quarantined_.push_back(p.id);
                continue;
            }
            if (p.title.empty()) s.issues_.push_back({p.id, IssueKind::missing_title, ""});

            std::vector<std::string> refs;
            refs.reserve(p.reference_ids.size());
            std::set<std::string> seen;
            bool self_flagged = false;
            for (auto& r : p.reference_ids) {
                if (r == p.id) {
                    if (!self_flagged) s.issues_.push_back({p.id, IssueKind::self_reference, r});
                    self_flagged = true;
                } else if (!seen.insert(r).second) {
                    s.issues_.push_back({p.id, IssueKind::duplicate_reference, r});
                } else {
                    refs.push_back(std::move(r));
                }
            }
            p.reference_ids = std::move(refs);
            std::string id = p.id;
            s.records_.emplace(std::move(id), std::move(p));
        }

        for (const auto& [id, p] : s.records_) {
            for (const auto& r : p.reference_ids) {
                if (s.records_.count(r)) {
                    s.citing_[r].insert(id);
                } else {
                    s.stubs_.insert(r);
                    s.issues_.push_back({id, IssueKind::dangling_reference, r});
                }
            }
            if (const ForCode* f = p.primary_field())
                s.cohorts_[{f->code, *p.year}].push_back(p.times_cited);
        }
        for (auto& [key, values] : s.cohorts_) std::sort(values.begin(), values.end());
        std::sort(s.issues_.begin(), s.issues_.end());
        std::sort(s.quarantined_.begin(), s.quarantined_.end());
        return s;
    }

    const std::map<std::string, Publication, std::less<>>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool contains(std::string_view id) const { return records_.find(id) != records_.end(); }
    bool is_stub(std::string_view id) const { return stubs_.find(std::string(id)) != stubs_.end(); }

    const Publication* find(std::string_view id) const {
        auto it = records_.find(id);
        return it == records_.end() ? nullptr : &it->second;
    }

    const Publication& at(std::string_view id) const {
        const Publication* p = find(id);
        if (!p) throw DataError("unknown publication id '" + std::string(id) + "'");
        return *p;
    }

    // Ingested records citing `id`; empty for unknown ids and stubs.
    const IdSet& citing_of(std::string_view id) const {
        static const IdSet empty;
        auto it = citing_.find(id);
        return it == citing_.end() ? empty : it->second;
    }

    // Stored reference order, stubs included.
    const std::vector<std::string>& references_of(std::string_view id) const { return at(id).reference_ids; }

    const IdSet& stubs() const { return stubs_; }
    const std::map<CohortKey, std::vector<std::int64_t>>& cohorts() const { return cohorts_; }

    const std::vector<std::int64_t>* cohort_of(const Publication& p) const {
        const ForCode* f = p.primary_field();
        if (!f || !p.year) return nullptr;
        auto it = cohorts_.find({f->code, *p.year});
        return it == cohorts_.end() ? nullptr : &it->second;
    }

    const std::vector<ValidationIssue>& issues() const { return issues_; }
    const std::vector<std::string>& quarantined() const { return quarantined_; }
    const std::vector<MalformedLine>& malformed() const { return malformed_; }

    bool operator==(const CitationStore&) const = default;

private:
    std::map<std::string, Publication, std::less<>> records_;
    std::map<std::string, IdSet, std::less<>> citing_;
    IdSet stubs_;
    std::map<CohortKey, std::vector<std::int64_t>> cohorts_;
    std::vector<ValidationIssue> issues_;
    std::vector<std::string> quarantined_;
    std::vector<MalformedLine> malformed_;
};

// Ordered by record id, then kind, then detail.
inline std::vector<ValidationIssue> validate(const CitationStore& store) { return store.issues(); }

inline std::vector<std::string> references_of(const CitationStore& store, std::string_view id) {
    return store.references_of(id);
}

inline IdSet citing_of(const CitationStore& store, std::string_view id) { return store.citing_of(id); }

// ---------------------------------------------------------------------------
// JSONL ingestion

struct IngestOptions {
    // Abort when more than this fraction of nonblank lines fails to parse.
    double max_malformed_fraction = 0.10;
};

inline CitationStore ingest_jsonl(std::istream& in, const IngestOptions& opts = {}) {
    std::vector<Publication> records;
    std::vector<MalformedLine> malformed;
    std::string line;
    std::size_t line_no = 0;
    std::size_t nonblank = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        ++nonblank;
        try {
            records.push_back(publication_from_json(Json::parse(line)));
        } catch (const Json::exception& e) {
            malformed.push_back({line_no, e.what()});
        } catch (const DataError& e) {
            malformed.push_back({line_no, e.what()});
        }
    }
    if (nonblank > 0 && static_cast<double>(malformed.size()) > opts.max_malformed_fraction * static_cast<double>(nonblank)) {
        const auto& first = malformed.front();
        throw DataError(std::to_string(malformed.size()) + " of " + std::to_string(nonblank) +
                        " lines malformed; first at line " + std::to_string(first.line) + ": " + first.message);
    }
    return CitationStore::from_records(std::move(records), std::move(malformed));
}

inline CitationStore ingest_jsonl(const std::string& path, const IngestOptions& opts = {}) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read corpus file '" + path + "'");
    return ingest_jsonl(in, opts);
}

} // namespace corpus

using corpus::CitationStore;
using corpus::Publication;

} // namespace cascade
