#include "fsscan.hpp"

#include <algorithm>
#include <fstream>

#include "bytes.hpp"
#include "sha256.hpp"

namespace onetrace {

namespace fs = std::filesystem;

namespace {

bool names_equal(std::string_view a, std::string_view b, bool case_insensitive) {
    return case_insensitive ? iequals(a, b) : a == b;
}

std::vector<fs::directory_entry> sorted_entries(const fs::path& dir) {
    std::vector<fs::directory_entry> entries;
    std::error_code ec;
    for (fs::directory_iterator it(dir, fs::directory_options::skip_permission_denied, ec), end;
         !ec && it != end; it.increment(ec))
        entries.push_back(*it);
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.path() < b.path(); });
    return entries;
}

// Rule path -> root-relative segments: drops the drive ("C:") and splits on
// both separator styles.
std::vector<std::string> pattern_segments(std::string_view pattern) {
    std::vector<std::string> segments;
    std::string current;
    for (char c : pattern) {
        if (c == '\\' || c == '/') {
            if (!current.empty()) segments.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) segments.push_back(std::move(current));
    if (!segments.empty() && segments.front().size() == 2 && segments.front()[1] == ':')
        segments.erase(segments.begin());
    return segments;
}

struct PatternMatch {
    fs::path path;          // on disk
    std::string rel;        // root-relative, '/'-joined
    std::string user;
    std::string uuid;
    bool is_directory = false;
};

void match_pattern(const fs::path& dir, const std::string& rel,
                   const std::vector<std::string>& segments, size_t idx, bool ci,
                   std::string user, std::string uuid, std::vector<PatternMatch>& out) {
    if (idx == segments.size()) {
        std::error_code ec;
        bool is_dir = fs::is_directory(dir, ec);
        out.push_back(PatternMatch{dir, rel, std::move(user), std::move(uuid), is_dir});
        return;
    }
    const std::string& seg = segments[idx];
    bool placeholder = seg == "{user}" || seg == "{uuid}";
    for (const auto& entry : sorted_entries(dir)) {
        std::string name = entry.path().filename().string();
        std::string next_rel = rel.empty() ? name : rel + "/" + name;
        if (placeholder) {
            std::error_code ec;
            if (!entry.is_directory(ec)) continue;
            // Directory enumeration cannot yield traversal segments, but the
            // expansion contract is asserted anyway.
            if (name == ".." || name.find('/') != std::string::npos) continue;
            std::string u = seg == "{user}" ? name : user;
            std::string id = seg == "{uuid}" ? name : uuid;
            match_pattern(entry.path(), next_rel, segments, idx + 1, ci, u, id, out);
        } else if (names_equal(name, seg, ci)) {
            match_pattern(entry.path(), next_rel, segments, idx + 1, ci, user, uuid, out);
        }
    }
}

struct ArtifactRule {
    const CatalogRule* rule;
    std::string file;
    std::string parser;
    std::string requires_substr;
};

SourceKind source_kind_for_parser(std::string_view parser) {
    if (parser == "storeparse.u1db") return SourceKind::database;
    if (parser.starts_with("webreg.")) return SourceKind::cache_file;
    return SourceKind::file;
}

Result<Sha256Digest> hash_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return make_error("io-error", "cannot open '" + p.string() + "'");
    Sha256 h;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        std::streamsize got = in.gcount();
        if (got > 0) h.update(ByteSpan{reinterpret_cast<const uint8_t*>(buf),
                                       static_cast<size_t>(got)});
    }
    return h.finish();
}

}  // namespace

std::string_view to_string(InstallVerdict v) {
    switch (v) {
        case InstallVerdict::installed: return "installed";
        case InstallVerdict::uninstalled_residue: return "uninstalled-residue";
        case InstallVerdict::not_detected: return "not-detected";
    }
    return "not-detected";
}

Result<ScanRoot> make_scan_root(const fs::path& root, std::optional<Platform> platform) {
    std::error_code ec;
    if (!fs::is_directory(root, ec))
        return make_error("input-error", "scan root '" + root.string() + "' is not a directory");

    ScanRoot out;
    out.root = root;
    if (platform && *platform != Platform::any) {
        out.platform = *platform;
    } else {
        auto has = [&](const char* rel) {
            std::error_code e;
            return fs::exists(root / rel, e);
        };
        if (has("Windows/System32") || has("windows/system32"))
            out.platform = Platform::windows;
        else if (has("Library") && has("Applications"))
            out.platform = Platform::macos;
        else if (has("private/var/mobile") || has("var/mobile"))
            out.platform = Platform::ios;
        else
            return make_error("platform-unknown",
                              "cannot auto-detect platform of '" + root.string() +
                                  "'; pass --platform");
    }

    fs::path users = root / "Users";
    std::error_code ec2;
    if (fs::is_directory(users, ec2)) {
        for (const auto& entry : sorted_entries(users)) {
            std::error_code e;
            if (entry.is_directory(e)) out.user_names.push_back(entry.path().filename().string());
        }
    }
    return out;
}

Result<TreeScan> scan_tree(const ScanRoot& root, const Catalog& catalog) {
    TreeScan out;
    const bool ci = root.platform == Platform::windows;
    const CatalogRule* diagnostic = catalog.find("core.diagnostic");

    // Tree digest identifies the scan root as the provenance container for
    // presence findings (a tree has no single byte stream to hash).
    EvidenceSource tree_source;
    tree_source.kind = SourceKind::file;
    tree_source.locator = root.root.string();

    std::vector<ArtifactRule> artifact_rules;
    std::vector<const CatalogRule*> path_rules;
    for (const auto& rule : catalog.rules()) {
        if (rule.kind != RuleKind::fs_path) continue;
        if (rule.platform != Platform::any && rule.platform != root.platform) continue;
        if (auto it = rule.payload.find("file"); it != rule.payload.end()) {
            artifact_rules.push_back(ArtifactRule{&rule, it->get<std::string>(),
                                                  rule.payload.value("parser", ""),
                                                  rule.payload.value("requires", "")});
        } else if (rule.payload.contains("path")) {
            path_rules.push_back(&rule);
        }
    }

    // Pattern rules with placeholder expansion.
    std::set<std::string> residue_paths;
    for (const auto* rule : path_rules) {
        auto segments = pattern_segments(rule->payload.value("path", ""));
        if (segments.empty()) continue;
        std::vector<PatternMatch> matches;
        match_pattern(root.root, "", segments, 0, ci, "", "", matches);
        for (const auto& m : matches) {
            Finding f;
            f.rule_id = rule->rule_id;
            f.category = rule->category;
            f.platform = rule->platform;
            f.confidence = rule->confidence;
            f.source = tree_source;
            f.set_attr("path", m.rel);
            if (!m.user.empty()) f.set_attr("user", m.user);
            if (!m.uuid.empty()) f.set_attr("uuid", m.uuid);
            out.findings.push_back(std::move(f));

            std::string role = rule->payload.value("install_role", "");
            if (role == "win-residue") {
                out.observations.push_back({InstallObservation::win_residue, m.rel});
            } else if (role == "win-pf") {
                for (const auto& child : sorted_entries(m.path)) {
                    std::string name = child.path().filename().string();
                    out.observations.push_back(
                        {iequals(name, "dist") ? InstallObservation::win_pf_dist
                                               : InstallObservation::win_pf_other,
                         m.rel + "/" + name});
                }
            } else if (role == "mac-app") {
                out.observations.push_back({InstallObservation::mac_app_bundle, m.rel});
            } else if (role == "mac-library") {
                out.observations.push_back({InstallObservation::mac_library_dirs, m.rel});
            }
        }
    }

    // Full walk: known artifact files, trash-located app bundles, unreadable
    // subtrees.
    std::vector<std::pair<fs::path, std::string>> stack{{root.root, ""}};
    while (!stack.empty()) {
        auto [dir, rel] = stack.back();
        stack.pop_back();
        std::error_code ec;
        fs::directory_iterator probe(dir, ec);
        if (ec) {
            if (diagnostic) {
                Finding f;
                f.rule_id = diagnostic->rule_id;
                f.category = diagnostic->category;
                f.platform = diagnostic->platform;
                f.confidence = diagnostic->confidence;
                f.source = tree_source;
                f.set_attr("error", "unreadable");
                f.set_attr("path", rel.empty() ? "." : rel);
                f.set_attr("detail", ec.message());
                out.findings.push_back(std::move(f));
            }
            continue;
        }
        std::vector<fs::directory_entry> entries = sorted_entries(dir);
        for (const auto& entry : entries) {
            std::string name = entry.path().filename().string();
            std::string next_rel = rel.empty() ? name : rel + "/" + name;
            std::error_code e;
            if (entry.is_symlink(e)) continue;  // never follow links out of the tree
            if (entry.is_directory(e)) {
                if (root.platform == Platform::macos && iequals(name, "Ubuntu One.app") &&
                    icontains(next_rel, ".Trash"))
                    out.observations.push_back(
                        {InstallObservation::mac_app_in_trash, next_rel});
                stack.emplace_back(entry.path(), next_rel);
                continue;
            }
            if (!entry.is_regular_file(e)) continue;
            for (const auto& ar : artifact_rules) {
                if (!names_equal(name, ar.file, true)) continue;
                if (!ar.requires_substr.empty() && !icontains(next_rel, ar.requires_substr))
                    continue;
                Finding f;
                f.rule_id = ar.rule->rule_id;
                f.category = ar.rule->category;
                f.platform = ar.rule->platform;
                f.confidence = ar.rule->confidence;
                f.source.kind = source_kind_for_parser(ar.parser);
                f.source.locator = entry.path().string();
                if (auto digest = hash_file(entry.path()))
                    f.source.container_sha256 = *digest;
                f.set_attr("artifact", ar.file);
                f.set_attr("path", next_rel);
                if (!ar.parser.empty()) f.set_attr("parser", ar.parser);
                out.findings.push_back(std::move(f));
            }
        }
    }

    std::sort(out.observations.begin(), out.observations.end());
    out.observations.erase(std::unique(out.observations.begin(), out.observations.end(),
                                       [](const auto& a, const auto& b) {
                                           return a.what == b.what && a.path == b.path;
                                       }),
                           out.observations.end());
    return out;
}

Result<InstallState> classify_install_state(Platform platform,
                                            const std::vector<PathObservation>& observations) {
    if (platform != Platform::windows && platform != Platform::macos)
        return make_error("unsupported-platform",
                          "install-state classification is defined for windows and macos only");

    auto has = [&](InstallObservation o) {
        return std::any_of(observations.begin(), observations.end(),
                           [&](const PathObservation& p) { return p.what == o; });
    };
    auto evidence_of = [&](std::initializer_list<InstallObservation> which) {
        std::vector<std::string> ev;
        for (const auto& p : observations)
            if (std::find(which.begin(), which.end(), p.what) != which.end())
                ev.push_back(p.path);
        std::sort(ev.begin(), ev.end());
        ev.erase(std::unique(ev.begin(), ev.end()), ev.end());
        return ev;
    };

    InstallState state;
    if (platform == Platform::windows) {
        bool pf_other = has(InstallObservation::win_pf_other);
        bool pf_dist = has(InstallObservation::win_pf_dist);
        bool residue = has(InstallObservation::win_residue);
        if (pf_other) {
            state.state = InstallVerdict::installed;
            state.evidence = evidence_of({InstallObservation::win_pf_other,
                                          InstallObservation::win_pf_dist});
        } else if (pf_dist && residue) {
            state.state = InstallVerdict::uninstalled_residue;
            state.evidence = evidence_of({InstallObservation::win_pf_dist,
                                          InstallObservation::win_residue});
        } else {
            state.state = InstallVerdict::not_detected;
        }
        return state;
    }

    // A trashed bundle is consistent with removal; the verdict itself needs
    // only the bundle and library observations.
    bool bundle = has(InstallObservation::mac_app_bundle);
    bool library = has(InstallObservation::mac_library_dirs);
    if (bundle) {
        state.state = InstallVerdict::installed;
        state.evidence = evidence_of({InstallObservation::mac_app_bundle,
                                      InstallObservation::mac_library_dirs});
    } else if (library) {
        state.state = InstallVerdict::uninstalled_residue;
        state.evidence = evidence_of({InstallObservation::mac_library_dirs,
                                      InstallObservation::mac_app_in_trash});
    } else {
        state.state = InstallVerdict::not_detected;
    }
    return state;
}

std::vector<std::pair<std::string, std::string>> route_artifacts(
    const std::vector<Finding>& findings) {
    std::vector<std::pair<std::string, std::string>> routed;
    std::set<std::string> seen;
    for (const auto& f : findings) {
        const std::string* parser = f.attr("parser");
        if (parser == nullptr || parser->empty()) continue;
        if (!seen.insert(f.source.locator).second) continue;
        routed.emplace_back(f.source.locator, *parser);
    }
    return routed;
}

}  // namespace onetrace
