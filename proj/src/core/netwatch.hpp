#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "catalog.hpp"
#include "errors.hpp"
#include "report.hpp"

namespace onetrace {

struct Packet {
    uint32_t ts_sec = 0;
    uint32_t ts_usec = 0;
    uint32_t orig_len = 0;
    std::vector<uint8_t> frame;  // link-layer bytes as captured

    bool ipv4 = false;
    uint8_t protocol = 0;  // 6 tcp, 17 udp
    uint32_t src_ip = 0, dst_ip = 0;
    uint16_t src_port = 0, dst_port = 0;
    bool tcp_syn = false, tcp_ack = false;
    uint32_t tcp_seq = 0;
    std::vector<uint8_t> payload;
};

struct PcapParse {
    std::vector<Packet> packets;
    uint64_t skipped_non_ethernet = 0;
    uint64_t skipped_non_ipv4 = 0;
    uint64_t skipped_other_protocol = 0;
    std::optional<Error> truncation;  // prior packets are kept
};

// Classic pcap only (magic 0xA1B2C3D4, either byte order, Ethernet link
// type); pcapng is rejected by name.
Result<PcapParse> parse_pcap(ByteSpan bytes);
std::vector<uint8_t> serialize_packets(const std::vector<Packet>& packets);

struct FlowObservation {
    uint32_t client_ip = 0, server_ip = 0;
    uint16_t client_port = 0, server_port = 0;
    uint8_t transport = 6;
    uint32_t first_seen_sec = 0, first_seen_usec = 0;
    uint32_t last_seen_sec = 0, last_seen_usec = 0;
    std::string sni;
};

struct NetAnalysis {
    std::vector<FlowObservation> flows;
    std::map<std::string, std::set<uint32_t>> dns;  // hostname -> addresses
    uint64_t dns_skipped = 0;
    uint64_t sni_skipped = 0;
    bool ocsp_observed = false;
};

NetAnalysis analyze_packets(const std::vector<Packet>& packets);

std::map<std::string, std::set<uint32_t>> extract_dns(const std::vector<Packet>& packets);
std::vector<std::pair<FlowObservation, std::string>> extract_sni(
    const std::vector<Packet>& packets);

std::vector<Finding> match_indicators(const NetAnalysis& analysis, const Catalog& catalog,
                                      const EvidenceSource& source);

// Hostnames (lowercased) that matched catalog hostname rules; input for the
// usage-mode decision.
std::set<std::string> matched_hostnames(const NetAnalysis& analysis, const Catalog& catalog);

enum class UsageMode { web_interface, client_app, indeterminate };
std::string_view to_string(UsageMode m);

struct UsageModeVerdict {
    UsageMode mode = UsageMode::indeterminate;
    bool ocsp_observed = false;
    std::vector<std::string> evidence;  // matched hostnames, sorted
};

// "web" marker hostnames only show up for browser sessions; "core" hostnames
// show up either way. OCSP observations are context only and never change
// the verdict.
UsageModeVerdict infer_usage_mode(const std::set<std::string>& hostnames,
                                  const NetAnalysis& analysis, const Catalog& catalog);

std::optional<Finding> usage_mode_finding(const UsageModeVerdict& verdict,
                                          const Catalog& catalog,
                                          const EvidenceSource& source);

}  // namespace onetrace
