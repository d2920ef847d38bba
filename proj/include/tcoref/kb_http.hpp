#ifndef TCOREF_KB_HTTP_HPP
#define TCOREF_KB_HTTP_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "tcoref/kb.hpp"

namespace tcoref {

struct SparqlKbOptions {
    std::string resource_prefix = "http://dbpedia.org/resource/";
    std::string redirect_predicate = std::string(kRedirectPredicate);
    std::string disambiguates_predicate = std::string(kDisambiguatesPredicate);
    std::string subclass_predicate = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
    std::size_t max_rows = 2000;
    int timeout_seconds = 20;
};

namespace sparql_detail {

inline std::string percent_encode(std::string_view s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        bool plain = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                     (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.' || c == '~';
        if (plain) {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 0xF];
        }
    }
    return out;
}

inline std::string response_key(std::string_view query) {
    auto fnv = [&](std::uint64_t seed) {
        std::uint64_t h = seed;
        for (unsigned char c : query) {
            h ^= c;
            h *= 1099511628211ull;
        }
        return h;
    };
    char buf[36];
    std::snprintf(buf, sizeof(buf), "%016llx%016llx",
                  static_cast<unsigned long long>(fnv(14695981039346656037ull)),
                  static_cast<unsigned long long>(fnv(88172645463325252ull)));
    return buf;
}

}  // namespace sparql_detail

// Knowledge base over a standard SPARQL-protocol endpoint, fronted by an
// on-disk response cache so that repeated runs are deterministic and cheap.
// Cache entries are one JSON file per query, written via temp file + rename.
class SparqlKb : public KnowledgeBase {
public:
    SparqlKb(std::string endpoint_url, std::string cache_dir = {}, SparqlKbOptions opts = {})
        : opts_(std::move(opts)), cache_dir_(std::move(cache_dir)) {
        auto path_pos = endpoint_url.find('/', endpoint_url.find("//") + 2);
        if (endpoint_url.find("//") == std::string::npos || path_pos == std::string::npos)
            throw KbError("bad SPARQL endpoint URL: " + endpoint_url, false);
        base_ = endpoint_url.substr(0, path_pos);
        path_ = endpoint_url.substr(path_pos);
        if (!cache_dir_.empty()) std::filesystem::create_directories(cache_dir_);
    }

    std::optional<Resource> lookup(const std::string& name) const override {
        for (const auto& uri : candidate_uris(name)) {
            nlohmann::json r = query("ASK { <" + uri + "> ?p ?o }");
            if (r.value("boolean", false)) return Resource{name_from_uri(uri), uri};
        }
        return std::nullopt;
    }

    PropertyIndex properties(const Resource& resource) const override {
        PropertyIndex index;
        nlohmann::json direct =
            query("SELECT ?p ?o WHERE { <" + resource.uri + "> ?p ?o } LIMIT " +
                  std::to_string(opts_.max_rows));
        for (const auto& row : direct.at("results").at("bindings")) {
            index.add(row.at("p").at("value").get<std::string>(), to_value(row.at("o"), false));
        }
        nlohmann::json inverse =
            query("SELECT ?p ?s WHERE { ?s ?p <" + resource.uri + "> } LIMIT " +
                  std::to_string(opts_.max_rows));
        for (const auto& row : inverse.at("results").at("bindings")) {
            index.add(row.at("p").at("value").get<std::string>(), to_value(row.at("s"), true));
        }
        return index;
    }

    std::optional<Resource> redirect_target(const Resource& resource) const override {
        nlohmann::json r = query("SELECT ?t WHERE { <" + resource.uri + "> <" +
                                 opts_.redirect_predicate + "> ?t } LIMIT 1");
        for (const auto& row : r.at("results").at("bindings")) {
            std::string uri = row.at("t").at("value").get<std::string>();
            return Resource{name_from_uri(uri), uri};
        }
        return std::nullopt;
    }

    std::vector<Resource> disambiguation_candidates(const Resource& resource) const override {
        std::vector<Resource> out;
        nlohmann::json r = query("SELECT ?t WHERE { <" + resource.uri + "> <" +
                                 opts_.disambiguates_predicate + "> ?t } LIMIT " +
                                 std::to_string(opts_.max_rows));
        for (const auto& row : r.at("results").at("bindings")) {
            std::string uri = row.at("t").at("value").get<std::string>();
            out.push_back(Resource{name_from_uri(uri), uri});
        }
        return out;
    }

    std::optional<std::string> super_type(const std::string& type_uri) const override {
        nlohmann::json r = query("SELECT ?s WHERE { <" + type_uri + "> <" +
                                 opts_.subclass_predicate + "> ?s } LIMIT 1");
        for (const auto& row : r.at("results").at("bindings")) {
            if (row.at("s").at("type").get<std::string>() == "uri")
                return row.at("s").at("value").get<std::string>();
        }
        return std::nullopt;
    }

    std::size_t network_requests() const { return network_requests_; }

private:
    static PropertyValue to_value(const nlohmann::json& binding, bool inverse) {
        PropertyValue v;
        v.kind = binding.at("type").get<std::string>() == "uri"
                     ? PropertyValue::Kind::resource
                     : PropertyValue::Kind::literal;
        v.value = binding.at("value").get<std::string>();
        v.inverse = inverse;
        return v;
    }

    std::vector<std::string> candidate_uris(const std::string& name) const {
        std::string underscored = trim(name);
        for (char& c : underscored)
            if (c == ' ') c = '_';
        std::vector<std::string> out{opts_.resource_prefix + underscored};
        if (!underscored.empty() && underscored[0] >= 'a' && underscored[0] <= 'z') {
            std::string upper = underscored;
            upper[0] = static_cast<char>(upper[0] - 'a' + 'A');
            out.push_back(opts_.resource_prefix + upper);
        }
        return out;
    }

    nlohmann::json query(const std::string& sparql) const {
        if (auto cached = read_cache(sparql)) return *cached;

        httplib::Client client(base_);
        client.set_connection_timeout(opts_.timeout_seconds);
        client.set_read_timeout(opts_.timeout_seconds);
        std::string url = path_ + "?query=" + sparql_detail::percent_encode(sparql) +
                          "&format=application%2Fsparql-results%2Bjson";
        httplib::Headers headers{{"Accept", "application/sparql-results+json"}};
        auto res = client.Get(url, headers);
        ++network_requests_;
        if (!res)
            throw KbError("SPARQL endpoint unreachable: " + base_, true);
        if (res->status != 200)
            throw KbError("SPARQL endpoint returned status " + std::to_string(res->status),
                          true);
        nlohmann::json body;
        try {
            body = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw KbError(std::string("bad SPARQL response: ") + e.what(), true);
        }
        write_cache(sparql, body);
        return body;
    }

    std::optional<nlohmann::json> read_cache(const std::string& sparql) const {
        if (cache_dir_.empty()) return std::nullopt;
        std::filesystem::path file =
            std::filesystem::path(cache_dir_) / (sparql_detail::response_key(sparql) + ".json");
        std::ifstream in(file);
        if (!in) return std::nullopt;
        try {
            nlohmann::json entry;
            in >> entry;
            if (entry.value("query", "") != sparql) return std::nullopt;
            return entry.at("body");
        } catch (const nlohmann::json::exception&) {
            return std::nullopt;
        }
    }

    void write_cache(const std::string& sparql, const nlohmann::json& body) const {
        if (cache_dir_.empty()) return;
        std::lock_guard<std::mutex> lock(cache_mu_);
        std::filesystem::path file =
            std::filesystem::path(cache_dir_) / (sparql_detail::response_key(sparql) + ".json");
        std::filesystem::path tmp = file;
        tmp += ".tmp";
        {
            std::ofstream out(tmp);
            out << nlohmann::json{{"query", sparql}, {"body", body}};
        }
        std::filesystem::rename(tmp, file);
    }

    SparqlKbOptions opts_;
    std::string base_;
    std::string path_;
    std::string cache_dir_;
    mutable std::mutex cache_mu_;
    mutable std::size_t network_requests_ = 0;
};

}  // namespace tcoref

#endif  // TCOREF_KB_HTTP_HPP
