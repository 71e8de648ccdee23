#pragma once
// Search DSL: `search publications [in <scope> for "<phrase>"] [where <pred>
// (and <pred>)*] return publications[<fields>|all] [sort by <field> [asc|desc]]
// [limit N] [skip N]`. Keywords are lowercase and case-sensitive.

#include "cascade/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cascade::dsl {

inline constexpr int kDefaultLimit = 20;
inline constexpr int kMaxLimit = 1000;

enum class Scope { title_only, full_data };
enum class Op { eq, gt, lt, in_set, is_not_empty };

struct TextSearch {
    Scope scope = Scope::full_data;
    std::string phrase;
    bool operator==(const TextSearch&) const = default;
};

using Value = std::variant<std::monostate, std::string, std::int64_t, std::vector<std::string>>;

struct Predicate {
    std::string field;
    Op op = Op::eq;
    Value value;
    bool operator==(const Predicate&) const = default;
};

struct Sort {
    std::string field;
    bool descending = false;
    bool operator==(const Sort&) const = default;
};

struct Query {
    std::optional<TextSearch> text_search;
    std::vector<Predicate> predicates;
    std::vector<std::string> projection; // empty means all
    std::optional<Sort> sort;
    int limit = kDefaultLimit;
    std::int64_t skip = 0;
    bool operator==(const Query&) const = default;
};

struct ResultPage {
    std::vector<Json> items;
    std::int64_t total_count = 0;
    bool operator==(const ResultPage&) const = default;
};

struct ParseError : UsageError {
    ParseError(std::size_t offset, const std::string& msg)
        : UsageError("DSL syntax error at byte " + std::to_string(offset) + ": " + msg), offset(offset) {}
    std::size_t offset;
};

struct QueryError : UsageError {
    using UsageError::UsageError;
};

// Score-like fields sort high-to-low unless told otherwise.
inline bool default_descending(std::string_view field) {
    return field == "times_cited" || field == "altmetric" || field == "relative_citation_ratio";
}

// ---------------------------------------------------------------------------
// Lexer

namespace detail {

enum class Tok { ident, string, integer, punct, end };

struct Token {
    Tok kind = Tok::end;
    std::string text;
    std::size_t offset = 0;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        Token t;
        t.offset = pos_;
        if (pos_ >= src_.size()) return t;
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t b = pos_;
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
            t.kind = Tok::ident;
            t.text = std::string(src_.substr(b, pos_ - b));
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t b = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            t.kind = Tok::integer;
            t.text = std::string(src_.substr(b, pos_ - b));
        } else if (c == '"') {
            ++pos_;
            t.kind = Tok::string;
            for (;;) {
                if (pos_ >= src_.size()) throw ParseError(t.offset, "unterminated string literal");
                char d = src_[pos_++];
                if (d == '"') break;
                if (d == '\\') {
                    if (pos_ >= src_.size()) throw ParseError(t.offset, "unterminated string literal");
                    char e = src_[pos_++];
                    if (e != '"' && e != '\\') throw ParseError(pos_ - 2, "unsupported escape \\" + std::string(1, e));
                    t.text.push_back(e);
                } else {
                    t.text.push_back(d);
                }
            }
        } else if (std::string_view("=<>[],+.").find(c) != std::string_view::npos) {
            ++pos_;
            t.kind = Tok::punct;
            t.text = std::string(1, c);
        } else {
            throw ParseError(pos_, "unexpected character '" + std::string(1, c) + "'");
        }
        return t;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;
};

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) { advance(); }

    Query parse() {
        Query q;
        expect_word("search");
        expect_word("publications");
        if (accept_word("in")) {
            TextSearch ts;
            std::string scope = expect_ident("search scope");
            if (scope == "title_only") ts.scope = Scope::title_only;
            else if (scope == "full_data") ts.scope = Scope::full_data;
            else fail(prev_offset_, "expected 'title_only' or 'full_data'");
            expect_word("for");
            ts.phrase = expect_string("search phrase");
            q.text_search = std::move(ts);
        } else if (accept_word("for")) {
            q.text_search = TextSearch{Scope::full_data, expect_string("search phrase")};
        }
        if (accept_word("where")) {
            q.predicates.push_back(predicate());
            while (accept_word("and")) q.predicates.push_back(predicate());
        }
        if (accept_word("return")) {
            expect_word("publications");
            if (accept_punct('[')) {
                if (!accept_word("all")) {
                    q.projection.push_back(expect_ident("field name"));
                    while (accept_punct('+')) q.projection.push_back(expect_ident("field name"));
                }
                expect_punct(']');
            }
        }
        if (accept_word("sort")) {
            expect_word("by");
            Sort s;
            s.field = path();
            s.descending = default_descending(s.field);
            if (accept_word("asc")) s.descending = false;
            else if (accept_word("desc")) s.descending = true;
            q.sort = std::move(s);
        }
        if (accept_word("limit")) {
            std::size_t at = cur_.offset;
            std::int64_t n = expect_integer("page size");
            if (n < 1 || n > kMaxLimit) fail(at, "limit must be in [1, " + std::to_string(kMaxLimit) + "]");
            q.limit = static_cast<int>(n);
        }
        if (accept_word("skip")) q.skip = expect_integer("offset");
        if (cur_.kind != Tok::end) fail(cur_.offset, "expected end of query, found '" + cur_.text + "'");
        return q;
    }

private:
    Lexer lex_;
    Token cur_;
    std::size_t prev_offset_ = 0;

    void advance() {
        prev_offset_ = cur_.offset;
        cur_ = lex_.next();
    }

    [[noreturn]] static void fail(std::size_t at, const std::string& msg) { throw ParseError(at, msg); }

    bool is_word(std::string_view w) const { return cur_.kind == Tok::ident && cur_.text == w; }

    bool accept_word(std::string_view w) {
        if (!is_word(w)) return false;
        advance();
        return true;
    }

    void expect_word(std::string_view w) {
        if (!accept_word(w)) fail(cur_.offset, "expected '" + std::string(w) + "'");
    }

    bool accept_punct(char c) {
        if (cur_.kind != Tok::punct || cur_.text[0] != c) return false;
        advance();
        return true;
    }

    void expect_punct(char c) {
        if (!accept_punct(c)) fail(cur_.offset, "expected '" + std::string(1, c) + "'");
    }

    std::string expect_ident(const char* what) {
        if (cur_.kind != Tok::ident) fail(cur_.offset, std::string("expected ") + what);
        std::string s = cur_.text;
        advance();
        return s;
    }

    std::string expect_string(const char* what) {
        if (cur_.kind != Tok::string) fail(cur_.offset, std::string("expected quoted ") + what);
        std::string s = cur_.text;
        advance();
        return s;
    }

    std::int64_t expect_integer(const char* what) {
        if (cur_.kind != Tok::integer) fail(cur_.offset, std::string("expected integer ") + what);
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(cur_.text.data(), cur_.text.data() + cur_.text.size(), v);
        if (ec != std::errc()) fail(cur_.offset, "integer out of range");
        advance();
        return v;
    }

    std::string path() {
        std::string p = expect_ident("field name");
        while (accept_punct('.')) p += "." + expect_ident("field name");
        return p;
    }

    Predicate predicate() {
        Predicate pr;
        pr.field = path();
        if (accept_punct('=')) {
            pr.op = Op::eq;
            if (cur_.kind == Tok::string) pr.value = expect_string("value");
            else if (cur_.kind == Tok::integer) pr.value = expect_integer("value");
            else fail(cur_.offset, "expected string or integer value");
        } else if (accept_punct('>')) {
            pr.op = Op::gt;
            pr.value = expect_integer("bound");
        } else if (accept_punct('<')) {
            pr.op = Op::lt;
            pr.value = expect_integer("bound");
        } else if (accept_word("in")) {
            pr.op = Op::in_set;
            expect_punct('[');
            std::vector<std::string> items{expect_string("list item")};
            while (accept_punct(',')) items.push_back(expect_string("list item"));
            expect_punct(']');
            pr.value = std::move(items);
        } else if (accept_word("is")) {
            expect_word("not");
            expect_word("empty");
            pr.op = Op::is_not_empty;
        } else {
            fail(cur_.offset, "expected one of '=', '>', '<', 'in', 'is not empty'");
        }
        return pr;
    }
};

inline std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace detail

inline Query parse(std::string_view text) { return detail::Parser(text).parse(); }

// Canonical text form; parse(format(q)) == q.
inline std::string format(const Query& q) {
    std::string out = "search publications";
    if (q.text_search) {
        out += q.text_search->scope == Scope::title_only ? " in title_only for " : " in full_data for ";
        out += detail::quote(q.text_search->phrase);
    }
    for (std::size_t i = 0; i < q.predicates.size(); ++i) {
        const auto& p = q.predicates[i];
        out += i == 0 ? " where " : " and ";
        out += p.field;
        switch (p.op) {
        case Op::eq:
            out += " = ";
            if (auto* s = std::get_if<std::string>(&p.value)) out += detail::quote(*s);
            else out += std::to_string(std::get<std::int64_t>(p.value));
            break;
        case Op::gt: out += " > " + std::to_string(std::get<std::int64_t>(p.value)); break;
        case Op::lt: out += " < " + std::to_string(std::get<std::int64_t>(p.value)); break;
        case Op::in_set: {
            out += " in [";
            const auto& items = std::get<std::vector<std::string>>(p.value);
            for (std::size_t k = 0; k < items.size(); ++k) {
                if (k) out += ", ";
                out += detail::quote(items[k]);
            }
            out += "]";
            break;
        }
        case Op::is_not_empty: out += " is not empty"; break;
        }
    }
    out += " return publications[";
    if (q.projection.empty()) {
        out += "all";
    } else {
        for (std::size_t i = 0; i < q.projection.size(); ++i) {
            if (i) out += "+";
            out += q.projection[i];
        }
    }
    out += "]";
    if (q.sort) {
        out += " sort by " + q.sort->field;
        if (q.sort->descending != default_descending(q.sort->field)) out += q.sort->descending ? " desc" : " asc";
    }
    if (q.limit != kDefaultLimit) out += " limit " + std::to_string(q.limit);
    if (q.skip != 0) out += " skip " + std::to_string(q.skip);
    return out;
}

// Wire form: canonical text with explicit paging.
inline std::string format_paged(Query q, int limit, std::int64_t skip) {
    q.limit = kDefaultLimit;
    q.skip = 0;
    return format(q) + " limit " + std::to_string(limit) + " skip " + std::to_string(skip);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

enum class FieldKind { text, text_list, integer, real };

struct FieldValue {
    FieldKind kind;
    std::vector<std::string> texts; // text: 0 or 1 entries; text_list: any
    std::optional<double> number;
};

inline std::optional<FieldValue> field_value(const Publication& p, std::string_view f) {
    auto text = [](const std::optional<std::string>& s) {
        FieldValue v{FieldKind::text, {}, {}};
        if (s) v.texts.push_back(*s);
        return v;
    };
    auto list = [](std::vector<std::string> xs) { return FieldValue{FieldKind::text_list, std::move(xs), {}}; };
    auto num = [](FieldKind k, std::optional<double> x) { return FieldValue{k, {}, x}; };

    if (f == "id") return text(p.id);
    if (f == "doi") return text(p.doi);
    if (f == "title") return text(p.title);
    if (f == "journal.title" || f == "journal") return text(p.venue.journal_title);
    if (f == "issn" || f == "journal.issn") return list(p.venue.issn);
    if (f == "references" || f == "reference_ids") return list(p.reference_ids);
    if (f == "authors") return list(p.authors);
    if (f == "FOR.name" || f == "FOR.code" || f == "FOR") {
        std::vector<std::string> xs;
        for (const auto& c : p.for_fields) xs.push_back(f == "FOR.code" ? c.code : c.name);
        return list(std::move(xs));
    }
    if (f == "year") return num(FieldKind::integer, p.year ? std::optional<double>(*p.year) : std::nullopt);
    if (f == "times_cited") return num(FieldKind::integer, static_cast<double>(p.times_cited));
    if (f == "altmetric")
        return num(FieldKind::integer, p.altmetric ? std::optional<double>(static_cast<double>(*p.altmetric)) : std::nullopt);
    if (f == "relative_citation_ratio" || f == "rcr") return num(FieldKind::real, p.rcr);
    return std::nullopt;
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline bool matches(const Publication& p, const Predicate& pr) {
    auto fv = field_value(p, pr.field);
    if (!fv) throw QueryError("unknown field '" + pr.field + "' in predicate");
    const bool numeric = fv->kind == FieldKind::integer || fv->kind == FieldKind::real;

    switch (pr.op) {
    case Op::is_not_empty:
        if (numeric) return fv->number.has_value();
        return std::any_of(fv->texts.begin(), fv->texts.end(), [](const auto& s) { return !s.empty(); });
    case Op::gt:
    case Op::lt: {
        if (!numeric) throw QueryError("field '" + pr.field + "' is not numeric");
        if (!fv->number) return false;
        double bound = static_cast<double>(std::get<std::int64_t>(pr.value));
        return pr.op == Op::gt ? *fv->number > bound : *fv->number < bound;
    }
    case Op::eq:
        if (auto* iv = std::get_if<std::int64_t>(&pr.value)) {
            if (!numeric) throw QueryError("field '" + pr.field + "' compared with an integer");
            return fv->number && *fv->number == static_cast<double>(*iv);
        } else {
            if (numeric) throw QueryError("numeric field '" + pr.field + "' compared with a string");
            const auto& s = std::get<std::string>(pr.value);
            return std::find(fv->texts.begin(), fv->texts.end(), s) != fv->texts.end();
        }
    case Op::in_set: {
        if (numeric) throw QueryError("numeric field '" + pr.field + "' used with 'in'");
        const auto& set = std::get<std::vector<std::string>>(pr.value);
        for (const auto& s : fv->texts)
            if (std::find(set.begin(), set.end(), s) != set.end()) return true;
        return false;
    }
    }
    return false;
}

inline bool phrase_match(const Publication& p, const TextSearch& ts) {
    // Abstracts are not part of the record, so both scopes search the title.
    return lower(p.title).find(lower(ts.phrase)) != std::string::npos;
}

inline const std::vector<std::string>& projection_fields() {
    static const std::vector<std::string> fields{"id", "doi", "title", "year", "journal", "FOR",
                                                 "times_cited", "altmetric", "relative_citation_ratio",
                                                 "reference_ids", "authors"};
    return fields;
}

// Missing values order before every present value.
inline int compare_for_sort(const FieldValue& a, const FieldValue& b) {
    if (a.kind == FieldKind::integer || a.kind == FieldKind::real) {
        if (!a.number || !b.number) return a.number.has_value() - b.number.has_value();
        return (*a.number > *b.number) - (*a.number < *b.number);
    }
    if (a.texts.empty() || b.texts.empty()) return !a.texts.empty() - !b.texts.empty();
    int c = a.texts.front().compare(b.texts.front());
    return (c > 0) - (c < 0);
}

} // namespace detail

inline void check_fields(const Query& q) {
    for (const auto& f : q.projection) {
        const auto& known = detail::projection_fields();
        if (std::find(known.begin(), known.end(), f) == known.end())
            throw QueryError("unknown projection field '" + f + "'");
    }
    if (q.sort) {
        Publication probe;
        auto fv = detail::field_value(probe, q.sort->field);
        if (!fv || fv->kind == detail::FieldKind::text_list)
            throw QueryError("cannot sort by '" + q.sort->field + "'");
    }
    Publication probe;
    for (const auto& p : q.predicates)
        if (!detail::field_value(probe, p.field)) throw QueryError("unknown field '" + p.field + "' in predicate");
}

inline Json project(const Publication& p, const std::vector<std::string>& fields) {
    Json full = corpus::to_json(p);
    if (fields.empty()) return full;
    Json out = Json::object();
    for (const auto& f : fields) out[f] = full.at(f);
    return out;
}

// All matches in result order (sort key, then id), ignoring paging.
inline std::vector<const Publication*> matching(const CitationStore& store, const Query& q) {
    check_fields(q);
    std::vector<const Publication*> hits;
    for (const auto& [id, p] : store.records()) {
        if (q.text_search && !detail::phrase_match(p, *q.text_search)) continue;
        bool ok = true;
        for (const auto& pr : q.predicates)
            if (!detail::matches(p, pr)) {
                ok = false;
                break;
            }
        if (ok) hits.push_back(&p);
    }
    if (q.sort) {
        const Sort& s = *q.sort;
        std::stable_sort(hits.begin(), hits.end(), [&](const Publication* a, const Publication* b) {
            int c = detail::compare_for_sort(*detail::field_value(*a, s.field), *detail::field_value(*b, s.field));
            if (c != 0) return s.descending ? c > 0 : c < 0;
            return a->id < b->id;
        });
    }
    return hits;
}

inline ResultPage evaluate(const CitationStore& store, const Query& q) {
    auto hits = matching(store, q);
    ResultPage page;
    page.total_count = static_cast<std::int64_t>(hits.size());
    auto first = std::min<std::size_t>(hits.size(), static_cast<std::size_t>(q.skip));
    auto last = std::min<std::size_t>(hits.size(), first + static_cast<std::size_t>(q.limit));
    for (auto i = first; i < last; ++i) page.items.push_back(project(*hits[i], q.projection));
    return page;
}

// {"items":{"publications":[...]},"_stats":{"total_count":N}}
inline Json to_json(const ResultPage& page) {
    Json pubs = Json::array();
    for (const auto& it : page.items) pubs.push_back(it);
    Json out = Json::object();
    out["items"] = Json{{"publications", std::move(pubs)}};
    out["_stats"] = Json{{"total_count", page.total_count}};
    return out;
}

} // namespace cascade::dsl
