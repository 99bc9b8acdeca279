#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "catalog.hpp"
#include "errors.hpp"
#include "report.hpp"

namespace onetrace {

struct ScanRoot {
    std::filesystem::path root;
    Platform platform = Platform::windows;
    std::vector<std::string> user_names;
};

// Declared platform, or auto-detection from tree landmarks.
Result<ScanRoot> make_scan_root(const std::filesystem::path& root,
                                std::optional<Platform> platform);

enum class InstallObservation {
    win_pf_dist,      // Program Files ubuntuone/dist present
    win_pf_other,     // Program Files ubuntuone content beyond dist
    win_residue,      // xdg / ProgramData / default-folder artifacts present
    mac_app_bundle,   // /Applications/Ubuntu One.app present
    mac_app_in_trash, // app bundle found under a Trash path
    mac_library_dirs  // Library caches / Application Support dirs present
};

struct PathObservation {
    InstallObservation what;
    std::string path;
    bool operator<(const PathObservation& o) const {
        return what != o.what ? what < o.what : path < o.path;
    }
};

enum class InstallVerdict { installed, uninstalled_residue, not_detected };
std::string_view to_string(InstallVerdict v);

struct InstallState {
    InstallVerdict state = InstallVerdict::not_detected;
    std::vector<std::string> evidence;
};

struct TreeScan {
    std::vector<Finding> findings;
    std::vector<PathObservation> observations;
};

// Matches catalog fs-path rules (with {user}/{uuid} expansion), reports known
// artifact files for routing, and collects install-state observations.
// Strictly read-only.
Result<TreeScan> scan_tree(const ScanRoot& root, const Catalog& catalog);

// Table-driven verdict; a pure function of the observation set.
Result<InstallState> classify_install_state(Platform platform,
                                            const std::vector<PathObservation>& observations);

// (artifact file locator, parser id) pairs from scan findings.
std::vector<std::pair<std::string, std::string>> route_artifacts(
    const std::vector<Finding>& findings);

}  // namespace onetrace
