#ifndef TCOREF_KB_HPP
#define TCOREF_KB_HPP

#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tcoref/text.hpp"

namespace tcoref {

// Well-known predicate identifiers; snapshot records expose redirect and
// disambiguation links through these as well as through dedicated fields.
inline constexpr std::string_view kRedirectPredicate =
    "http://dbpedia.org/ontology/wikiPageRedirects";
inline constexpr std::string_view kDisambiguatesPredicate =
    "http://dbpedia.org/ontology/wikiPageDisambiguates";

struct KbError : std::runtime_error {
    explicit KbError(const std::string& msg, bool retryable_ = true)
        : std::runtime_error(msg), retryable(retryable_) {}
    bool retryable;
};

struct Resource {
    std::string name;
    std::string uri;

    friend bool operator==(const Resource& a, const Resource& b) { return a.uri == b.uri; }
};

inline std::string local_name(std::string_view uri) {
    std::size_t pos = uri.find_last_of("#/");
    return std::string(pos == std::string_view::npos ? uri : uri.substr(pos + 1));
}

inline std::string name_from_uri(std::string_view uri) {
    std::string n = local_name(uri);
    for (char& c : n)
        if (c == '_') c = ' ';
    return n;
}

// Key under which resource names are matched: case-folded, underscores to
// spaces, whitespace collapsed.
inline std::string normalize_kb_name(std::string_view name) {
    std::string folded = fold_case(name);
    for (char& c : folded)
        if (c == '_') c = ' ';
    std::vector<std::string> parts;
    for (auto piece : split_whitespace(folded)) parts.emplace_back(piece);
    return join(parts);
}

struct PropertyValue {
    enum class Kind { literal, resource };
    Kind kind = Kind::literal;
    std::string value;  // literal text, or the resource identifier
    bool inverse = false;
};

// Every property is indexed twice: by the full predicate identifier and by the
// predicate's local name, so that e.g. rdf:type and a second ontology's "type"
// land under one key. Aggregation (redirect following) is append-only.
struct PropertyIndex {
    std::map<std::string, std::vector<PropertyValue>> by_uri;
    std::map<std::string, std::vector<PropertyValue>> by_local_name;

    void add(const std::string& predicate_uri, PropertyValue value) {
        by_uri[predicate_uri].push_back(value);
        by_local_name[fold_case(local_name(predicate_uri))].push_back(std::move(value));
    }

    void merge(const PropertyIndex& other) {
        for (const auto& [key, values] : other.by_uri) {
            auto& slot = by_uri[key];
            slot.insert(slot.end(), values.begin(), values.end());
        }
        for (const auto& [key, values] : other.by_local_name) {
            auto& slot = by_local_name[key];
            slot.insert(slot.end(), values.begin(), values.end());
        }
    }

    const std::vector<PropertyValue>* local(const std::string& name) const {
        auto it = by_local_name.find(fold_case(name));
        return it == by_local_name.end() ? nullptr : &it->second;
    }

    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& [key, values] : by_uri) {
            (void)key;
            n += values.size();
        }
        return n;
    }
};

// Read interface over a semantic knowledge base. Implementations must be
// deterministic for a fixed snapshot and safe for concurrent lookups.
class KnowledgeBase {
public:
    virtual ~KnowledgeBase() = default;

    virtual std::optional<Resource> lookup(const std::string& name) const = 0;
    // All properties of the resource, inverse properties included and flagged.
    virtual PropertyIndex properties(const Resource& resource) const = 0;
    virtual std::optional<Resource> redirect_target(const Resource& resource) const = 0;
    virtual std::vector<Resource> disambiguation_candidates(const Resource& resource) const = 0;
    virtual std::optional<std::string> super_type(const std::string& type_uri) const = 0;
};

// Offline snapshot backend; the deterministic default for tests and batch
// runs. File format: a JSON object with
//   resources: [{uri, name?, redirects_to?, disambiguates?: [uri],
//                properties?: [[predicate_uri, "literal"|"resource", value]],
//                inverse_properties?: [...same...]}]
//   type_hierarchy: {type_uri: super_type_uri}
// Inverse properties implied by other records' direct properties (including
// redirect and disambiguation links) are derived automatically at load.
class SnapshotKb : public KnowledgeBase {
public:
    static SnapshotKb from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw KbError("cannot read KB snapshot: " + path, false);
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw KbError("malformed KB snapshot " + path + ": " + e.what(), false);
        }
        return SnapshotKb(doc);
    }

    explicit SnapshotKb(const nlohmann::json& doc) {
        if (doc.contains("type_hierarchy")) {
            for (const auto& [type_uri, super] : doc.at("type_hierarchy").items())
                hierarchy_[type_uri] = super.get<std::string>();
        }
        for (const auto& res : doc.value("resources", nlohmann::json::array())) {
            Record rec;
            rec.uri = res.at("uri").get<std::string>();
            rec.name = res.value("name", name_from_uri(rec.uri));
            if (res.contains("redirects_to"))
                rec.redirects_to = res.at("redirects_to").get<std::string>();
            for (const auto& uri : res.value("disambiguates", nlohmann::json::array()))
                rec.disambiguates.push_back(uri.get<std::string>());
            for (const auto& p : res.value("properties", nlohmann::json::array()))
                rec.direct.push_back(parse_property(p));
            for (const auto& p : res.value("inverse_properties", nlohmann::json::array()))
                rec.inverse.push_back(parse_property(p));
            std::string key = rec.uri;
            records_.emplace(key, std::move(rec));
        }
        for (auto& [uri, rec] : records_) {
            names_.emplace(normalize_kb_name(rec.name), uri);
            names_.emplace(normalize_kb_name(name_from_uri(uri)), uri);
        }
        derive_link_properties();
        derive_inverse_properties();
    }

    std::optional<Resource> lookup(const std::string& name) const override {
        auto it = names_.find(normalize_kb_name(name));
        if (it == names_.end()) return std::nullopt;
        return make_resource(it->second);
    }

    PropertyIndex properties(const Resource& resource) const override {
        PropertyIndex index;
        auto it = records_.find(resource.uri);
        if (it == records_.end()) return index;
        for (const auto& [pred, value] : it->second.direct) index.add(pred, value);
        for (const auto& [pred, value] : it->second.inverse) {
            PropertyValue v = value;
            v.inverse = true;
            index.add(pred, std::move(v));
        }
        return index;
    }

    std::optional<Resource> redirect_target(const Resource& resource) const override {
        auto it = records_.find(resource.uri);
        if (it == records_.end() || it->second.redirects_to.empty()) return std::nullopt;
        return make_resource(it->second.redirects_to);
    }

    std::vector<Resource> disambiguation_candidates(const Resource& resource) const override {
        std::vector<Resource> out;
        auto it = records_.find(resource.uri);
        if (it == records_.end()) return out;
        for (const auto& uri : it->second.disambiguates) out.push_back(make_resource(uri));
        return out;
    }

    std::optional<std::string> super_type(const std::string& type_uri) const override {
        auto it = hierarchy_.find(type_uri);
        if (it == hierarchy_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t resource_count() const { return records_.size(); }

private:
    struct Record {
        std::string uri;
        std::string name;
        std::string redirects_to;
        std::vector<std::string> disambiguates;
        std::vector<std::pair<std::string, PropertyValue>> direct;
        std::vector<std::pair<std::string, PropertyValue>> inverse;
    };

    static std::pair<std::string, PropertyValue> parse_property(const nlohmann::json& p) {
        if (!p.is_array() || p.size() != 3)
            throw KbError("snapshot property must be [predicate, kind, value]", false);
        PropertyValue value;
        std::string kind = p.at(1).get<std::string>();
        if (kind == "resource") value.kind = PropertyValue::Kind::resource;
        else if (kind == "literal") value.kind = PropertyValue::Kind::literal;
        else throw KbError("unknown property kind: " + kind, false);
        value.value = p.at(2).get<std::string>();
        return {p.at(0).get<std::string>(), std::move(value)};
    }

    Resource make_resource(const std::string& uri) const {
        auto it = records_.find(uri);
        return Resource{it == records_.end() ? name_from_uri(uri) : it->second.name, uri};
    }

    // Expose redirect and disambiguation links as ordinary properties too.
    void derive_link_properties() {
        for (auto& [uri, rec] : records_) {
            if (!rec.redirects_to.empty())
                rec.direct.push_back({std::string(kRedirectPredicate),
                                      PropertyValue{PropertyValue::Kind::resource,
                                                    rec.redirects_to, false}});
            for (const auto& target : rec.disambiguates)
                rec.direct.push_back({std::string(kDisambiguatesPredicate),
                                      PropertyValue{PropertyValue::Kind::resource, target,
                                                    false}});
        }
    }

    // A direct property (s, p, o) with a resource value o known to the
    // snapshot yields the inverse entry (p, s) on o.
    void derive_inverse_properties() {
        for (const auto& [uri, rec] : records_) {
            for (const auto& [pred, value] : rec.direct) {
                if (value.kind != PropertyValue::Kind::resource) continue;
                auto target = records_.find(value.value);
                if (target == records_.end()) continue;
                target->second.inverse.push_back(
                    {pred, PropertyValue{PropertyValue::Kind::resource, uri, false}});
            }
        }
    }

    std::map<std::string, Record> records_;
    std::map<std::string, std::string> names_;
    std::map<std::string, std::string> hierarchy_;
};

}  // namespace tcoref

#endif  // TCOREF_KB_HPP
