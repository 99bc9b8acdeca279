#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "catalog.hpp"
#include "errors.hpp"
#include "report.hpp"

namespace onetrace {

struct OAuthToken {
    std::string consumer_key;
    std::string consumer_secret;
    std::string token;
    std::string token_secret;
};

struct NodeRecord {
    std::string parent_path;
    std::string path;
    std::string content_path;
    std::string name;
    int node_type = 0;  // 1 = directory, 2 = file
    bool is_public = false;
    std::string public_url;
    int64_t size = -1;  // -1 for directories
    std::string last_modified;
    std::string hash;  // "sha1:<hex>"
};

struct U1DbParse {
    std::vector<OAuthToken> tokens;
    std::vector<NodeRecord> nodes;
    std::string version;
    bool wal_mode = false;
    std::vector<Finding> findings;
};

// Extracts the mobile client's authentication tokens, synced-node inventory
// and app version. Missing tables are tolerated (partial results).
Result<U1DbParse> parse_u1_db(ByteSpan bytes, const EvidenceSource& source,
                              const Catalog& catalog);

}  // namespace onetrace
