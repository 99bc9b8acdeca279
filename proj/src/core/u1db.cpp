#include "u1db.hpp"

#include <map>

#include "sqlite_reader.hpp"

namespace onetrace {

namespace {

// Column positions by declared name, so a reordered schema still decodes.
std::map<std::string, size_t> column_index(const SqliteTable& t) {
    std::map<std::string, size_t> idx;
    for (size_t i = 0; i < t.columns.size(); ++i) idx[ascii_lower(t.columns[i])] = i;
    return idx;
}

const SqliteValue* cell(const SqliteRow& row, const std::map<std::string, size_t>& idx,
                        const std::string& col) {
    auto it = idx.find(col);
    if (it == idx.end() || it->second >= row.values.size()) return nullptr;
    return &row.values[it->second];
}

Finding base_finding(const CatalogRule& rule, const EvidenceSource& source) {
    Finding f;
    f.rule_id = rule.rule_id;
    f.category = rule.category;
    f.platform = rule.platform;
    f.confidence = rule.confidence;
    f.source = source;
    return f;
}

}  // namespace

Result<U1DbParse> parse_u1_db(ByteSpan bytes, const EvidenceSource& source,
                              const Catalog& catalog) {
    auto reader = SqliteReader::open(bytes);
    if (!reader) return reader.error();

    U1DbParse out;
    out.wal_mode = reader->wal_mode();

    const CatalogRule* login_rule = catalog.find("db.u1.login-info");
    const CatalogRule* nodes_rule = catalog.find("db.u1.nodes");
    const CatalogRule* version_rule = catalog.find("db.u1.version");
    const CatalogRule* journal_rule = catalog.find("db.sqlite.journal");

    if (reader->has_table("login_info_table")) {
        auto table = reader->read_table("login_info_table");
        if (!table) return table.error();
        auto idx = column_index(*table);
        for (const auto& row : table->rows) {
            OAuthToken t;
            if (const auto* v = cell(row, idx, "consumer_key")) t.consumer_key = v->as_text();
            if (const auto* v = cell(row, idx, "consumer_secret"))
                t.consumer_secret = v->as_text();
            if (const auto* v = cell(row, idx, "token")) t.token = v->as_text();
            if (const auto* v = cell(row, idx, "token_secret")) t.token_secret = v->as_text();
            if (login_rule && !t.consumer_key.empty()) {
                Finding f = base_finding(*login_rule, source);
                f.set_attr("consumer-key", t.consumer_key);
                if (!t.consumer_secret.empty()) f.set_attr("consumer-secret", t.consumer_secret);
                if (!t.token.empty()) f.set_attr("token", t.token);
                if (!t.token_secret.empty()) f.set_attr("token-secret", t.token_secret);
                out.findings.push_back(std::move(f));
            }
            out.tokens.push_back(std::move(t));
        }
    }

    if (reader->has_table("nodes_table")) {
        auto table = reader->read_table("nodes_table");
        if (!table) return table.error();
        auto idx = column_index(*table);
        for (const auto& row : table->rows) {
            NodeRecord n;
            if (const auto* v = cell(row, idx, "parent_path")) n.parent_path = v->as_text();
            if (const auto* v = cell(row, idx, "type"))
                n.node_type = static_cast<int>(v->as_int());
            if (const auto* v = cell(row, idx, "path")) n.path = v->as_text();
            if (const auto* v = cell(row, idx, "content_path")) n.content_path = v->as_text();
            if (const auto* v = cell(row, idx, "name")) n.name = v->as_text();
            if (const auto* v = cell(row, idx, "is_public")) n.is_public = v->as_int() != 0;
            if (const auto* v = cell(row, idx, "public_url")) n.public_url = v->as_text();
            if (const auto* v = cell(row, idx, "size")) n.size = v->as_int(-1);
            if (const auto* v = cell(row, idx, "last_modified")) n.last_modified = v->as_text();
            if (const auto* v = cell(row, idx, "hash")) n.hash = v->as_text();

            if (nodes_rule && !n.name.empty()) {
                Finding f = base_finding(*nodes_rule, source);
                f.set_attr("filename", n.name);
                if (!n.path.empty()) f.set_attr("path", n.path);
                if (!n.parent_path.empty()) f.set_attr("parent-path", n.parent_path);
                f.set_attr("node-type", n.node_type == 1   ? "directory"
                                        : n.node_type == 2 ? "file"
                                                           : std::to_string(n.node_type));
                f.set_attr("size", std::to_string(n.size));
                if (!n.hash.empty()) f.set_attr("hash", n.hash);
                if (!n.last_modified.empty()) f.set_attr("last-modified", n.last_modified);
                f.set_attr("is-public", n.is_public ? "true" : "false");
                if (!n.public_url.empty()) f.set_attr("public-url", n.public_url);
                out.findings.push_back(std::move(f));
            }
            out.nodes.push_back(std::move(n));
        }
    }

    if (reader->has_table("version_table")) {
        auto table = reader->read_table("version_table");
        if (!table) return table.error();
        auto idx = column_index(*table);
        for (const auto& row : table->rows) {
            if (const auto* v = cell(row, idx, "version")) {
                out.version = v->as_text();
                if (version_rule && !out.version.empty()) {
                    Finding f = base_finding(*version_rule, source);
                    f.set_attr("key", "app-version");
                    f.set_attr("value", out.version);
                    out.findings.push_back(std::move(f));
                }
            }
        }
    }

    if (out.wal_mode && journal_rule) {
        Finding f = base_finding(*journal_rule, source);
        f.set_attr("key", "journal-mode");
        f.set_attr("value", "wal");
        out.findings.push_back(std::move(f));
    }
    return out;
}

}  // namespace onetrace
