#include "cachepage.hpp"

#include "bytes.hpp"

namespace onetrace {

namespace {

Finding base_finding(const CatalogRule& rule, const EvidenceSource& source, uint64_t offset,
                     uint64_t length) {
    Finding f;
    f.rule_id = rule.rule_id;
    f.category = rule.category;
    f.platform = rule.platform;
    f.confidence = rule.confidence;
    f.source = source;
    f.source.byte_range = ByteRange{offset, length};
    return f;
}

std::string strip_crlf(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s)
        if (c != '\r' && c != '\n') out.push_back(c);
    return out;
}

// `name="<attr...>"` followed by `value="..."`; tolerates the wrapped lines
// cache files pick up on disk.
std::optional<std::pair<std::string, uint64_t>> attr_value(std::string_view text,
                                                           std::string_view name_prefix,
                                                           size_t from) {
    std::string needle = "name=\"" + std::string(name_prefix);
    size_t at = text.find(needle, from);
    if (at == std::string_view::npos) return std::nullopt;
    size_t name_end = text.find('"', at + 6);
    if (name_end == std::string_view::npos) return std::nullopt;
    size_t value_at = text.find("value=\"", name_end);
    if (value_at == std::string_view::npos || value_at > name_end + 256) return std::nullopt;
    size_t value_start = value_at + 7;
    size_t value_end = text.find('"', value_start);
    if (value_end == std::string_view::npos) return std::nullopt;
    return std::pair{strip_crlf(text.substr(value_start, value_end - value_start)),
                     static_cast<uint64_t>(at)};
}

}  // namespace

std::optional<CachePage> cache_page_from(std::string_view s) {
    if (s == "dashboard") return CachePage::dashboard;
    if (s == "files") return CachePage::files;
    if (s == "opened") return CachePage::opened;
    return std::nullopt;
}

std::optional<CachePage> cache_page_for_filename(std::string_view basename) {
    std::string lower = ascii_lower(basename);
    if (lower == "dashboard.htm" || lower == "dashboard.html") return CachePage::dashboard;
    if (lower == "files.htm" || lower == "files.html") return CachePage::files;
    if (lower == "opened.htm" || lower == "+opened.htm" || lower == "opened.html")
        return CachePage::opened;
    return std::nullopt;
}

std::optional<Finding> parse_dashboard_html(std::string_view text,
                                            const EvidenceSource& source,
                                            const Catalog& catalog) {
    const CatalogRule* rule = catalog.find("web.cache.dashboard-welcome");
    if (rule == nullptr) return std::nullopt;
    std::string marker = rule->payload.value("marker", "<span>Welcome");
    std::string end_tag = rule->payload.value("end", "</span>");

    size_t at = text.find(marker);
    while (at != std::string_view::npos) {
        size_t name_start = at + marker.size();
        size_t end = text.find(end_tag, name_start);
        if (end == std::string_view::npos) return std::nullopt;
        std::string_view raw = text.substr(name_start, end - name_start);
        // Require a separator so "Welcomed" style text cannot match.
        if (!raw.empty() && (raw[0] == ' ' || raw[0] == '\t' || raw[0] == '\r' ||
                             raw[0] == '\n')) {
            std::string name = normalize_ws(raw);
            if (!name.empty()) {
                Finding f = base_finding(*rule, source, at, end + end_tag.size() - at);
                f.set_attr("full-name", name);
                return f;
            }
        }
        at = text.find(marker, at + 1);
    }
    return std::nullopt;
}

std::vector<Finding> parse_opened_html(std::string_view text, const EvidenceSource& source,
                                       const Catalog& catalog) {
    std::vector<Finding> findings;

    if (const CatalogRule* rule = catalog.find("web.cache.opened-email")) {
        std::string name = rule->payload.value("name", "openid.ax.value.email");
        if (auto v = attr_value(text, name, 0)) {
            Finding f = base_finding(*rule, source, v->second, 0);
            f.set_attr("email", v->first);
            findings.push_back(std::move(f));
        }
    }
    if (const CatalogRule* rule = catalog.find("web.cache.opened-fullname")) {
        std::string name = rule->payload.value("name", "openid.ax.value.fullname");
        if (auto v = attr_value(text, name, 0)) {
            std::string full = normalize_ws(v->first);
            if (!full.empty()) {
                Finding f = base_finding(*rule, source, v->second, 0);
                f.set_attr("full-name", full);
                findings.push_back(std::move(f));
            }
        }
    }
    if (const CatalogRule* rule = catalog.find("web.cache.opened-identity")) {
        std::string name = rule->payload.value("name", "openid.identity");
        std::string prefix = rule->payload.value("url_prefix", "https://login.ubuntu.com/+id/");
        if (auto v = attr_value(text, name, 0)) {
            if (v->first.size() > prefix.size() && v->first.starts_with(prefix)) {
                Finding f = base_finding(*rule, source, v->second, 0);
                f.set_attr("openid-url", v->first);
                f.set_attr("openid-suffix", v->first.substr(prefix.size()));
                findings.push_back(std::move(f));
            }
        }
    }
    return findings;
}

std::vector<Finding> parse_files_html(std::string_view text, const EvidenceSource& source,
                                      const Catalog& catalog) {
    std::vector<Finding> findings;
    const CatalogRule* rule = catalog.find("web.cache.files-row");
    if (rule == nullptr) return findings;

    std::string name_cell = "<td class=\"" + rule->payload.value("name_cell", "files-td-name");
    std::string size_cell = "<td class=\"" + rule->payload.value("size_cell", "files-td-size");
    std::string date_cell = "<td class=\"" + rule->payload.value("date_cell", "files-td-date");
    std::string href_prefix =
        "href=\"" + rule->payload.value("href_prefix", "https://files.one.ubuntu.com/");

    size_t at = text.find(name_cell);
    while (at != std::string_view::npos) {
        size_t block_end = text.find(name_cell, at + name_cell.size());
        std::string_view block = text.substr(
            at, block_end == std::string_view::npos ? text.size() - at : block_end - at);

        std::string filename, url_id, size, timestamp;
        if (size_t t = block.find("<a title=\""); t != std::string_view::npos) {
            size_t end = block.find('"', t + 10);
            if (end != std::string_view::npos)
                filename = strip_crlf(block.substr(t + 10, end - t - 10));
        }
        if (size_t h = block.find(href_prefix); h != std::string_view::npos) {
            size_t start = h + href_prefix.size();
            size_t end = block.find('"', start);
            if (end != std::string_view::npos)
                url_id = strip_crlf(block.substr(start, end - start));
        }
        if (size_t s = block.find(size_cell); s != std::string_view::npos) {
            size_t start = block.find('>', s);
            size_t end = block.find("</td>", s);
            if (start != std::string_view::npos && end != std::string_view::npos && start < end)
                size = normalize_ws(block.substr(start + 1, end - start - 1));
        }
        if (size_t d = block.find(date_cell); d != std::string_view::npos) {
            size_t span = block.find("<span title=\"", d);
            if (span != std::string_view::npos) {
                size_t start = span + 13;
                size_t end = block.find('"', start);
                if (end != std::string_view::npos)
                    timestamp = std::string(trim_view(block.substr(start, end - start)));
            }
        }

        if (!filename.empty()) {
            Finding f = base_finding(*rule, source, at, block.size());
            f.set_attr("filename", filename);
            if (!size.empty()) f.set_attr("size", size);
            if (!timestamp.empty()) {
                f.set_attr("timestamp", timestamp);
                f.set_attr("timezone", "local-time-unknown");
            }
            if (!url_id.empty()) f.set_attr("url-id", url_id);
            findings.push_back(std::move(f));
        }
        at = block_end;
    }
    return findings;
}

std::vector<Finding> parse_cache_page(CachePage page, std::string_view text,
                                      const EvidenceSource& source, const Catalog& catalog) {
    switch (page) {
        case CachePage::dashboard: {
            std::vector<Finding> out;
            if (auto f = parse_dashboard_html(text, source, catalog)) out.push_back(std::move(*f));
            return out;
        }
        case CachePage::opened: return parse_opened_html(text, source, catalog);
        case CachePage::files: return parse_files_html(text, source, catalog);
    }
    return {};
}

}  // namespace onetrace
