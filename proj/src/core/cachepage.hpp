#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "catalog.hpp"
#include "report.hpp"

namespace onetrace {

enum class CachePage { dashboard, files, opened };
std::optional<CachePage> cache_page_from(std::string_view s);
std::optional<CachePage> cache_page_for_filename(std::string_view basename);

// Pattern-based extraction over cache page text. Cache pages are often
// partial, so these scan for anchored snippets instead of parsing a DOM;
// absent patterns simply yield no findings.
std::optional<Finding> parse_dashboard_html(std::string_view text,
                                            const EvidenceSource& source,
                                            const Catalog& catalog);
std::vector<Finding> parse_opened_html(std::string_view text, const EvidenceSource& source,
                                       const Catalog& catalog);
std::vector<Finding> parse_files_html(std::string_view text, const EvidenceSource& source,
                                      const Catalog& catalog);

std::vector<Finding> parse_cache_page(CachePage page, std::string_view text,
                                      const EvidenceSource& source, const Catalog& catalog);

}  // namespace onetrace
