#include "netwatch.hpp"

#include <algorithm>

#include "bytes.hpp"

namespace onetrace {

namespace {

constexpr uint32_t kPcapMagicLE = 0xA1B2C3D4;
constexpr uint32_t kPcapMagicBE = 0xD4C3B2A1;
constexpr uint32_t kPcapngMagic = 0x0A0D0D0A;
constexpr size_t kMaxReassembly = 16 << 10;

void put_le16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v));
    out.push_back(static_cast<uint8_t>(v >> 8));
}
void put_le32(std::vector<uint8_t>& out, uint32_t v) {
    put_le16(out, static_cast<uint16_t>(v));
    put_le16(out, static_cast<uint16_t>(v >> 16));
}

}  // namespace

Result<PcapParse> parse_pcap(ByteSpan bytes) {
    if (bytes.size() >= 4 && read_le32(bytes.data()) == kPcapngMagic)
        return make_error("bad-magic", "pcapng captures are not supported; convert to classic pcap");
    if (bytes.size() < 24) return make_error("bad-magic", "capture shorter than a pcap header");

    uint32_t magic = read_le32(bytes.data());
    bool swapped;  // true when file byte order differs from little-endian
    if (magic == kPcapMagicLE)
        swapped = false;
    else if (magic == kPcapMagicBE)
        swapped = true;
    else
        return make_error("bad-magic", "not a classic pcap capture");

    auto u32 = [&](const uint8_t* p) { return swapped ? read_be32(p) : read_le32(p); };

    uint32_t linktype = u32(bytes.data() + 20);
    if (linktype != 1)
        return make_error("unsupported-linktype",
                          "only Ethernet captures are supported (linktype " +
                              std::to_string(linktype) + ")");

    PcapParse out;
    uint64_t pos = 24;
    while (pos < bytes.size()) {
        if (pos + 16 > bytes.size()) {
            out.truncation = make_error("truncated-record", "record header cut short", pos);
            break;
        }
        uint32_t ts_sec = u32(bytes.data() + pos);
        uint32_t ts_usec = u32(bytes.data() + pos + 4);
        uint32_t incl_len = u32(bytes.data() + pos + 8);
        uint32_t orig_len = u32(bytes.data() + pos + 12);
        pos += 16;
        if (pos + incl_len > bytes.size()) {
            out.truncation = make_error("truncated-record", "record data cut short", pos);
            break;
        }
        ByteSpan frame = bytes.subspan(pos, incl_len);
        pos += incl_len;

        Packet pkt;
        pkt.ts_sec = ts_sec;
        pkt.ts_usec = ts_usec;
        pkt.orig_len = orig_len;
        pkt.frame.assign(frame.begin(), frame.end());

        if (frame.size() < 14) {
            out.skipped_non_ethernet++;
            out.packets.push_back(std::move(pkt));
            continue;
        }
        uint16_t ethertype = read_be16(frame.data() + 12);
        if (ethertype != 0x0800) {
            out.skipped_non_ipv4++;
            out.packets.push_back(std::move(pkt));
            continue;
        }
        ByteSpan ip = frame.subspan(14);
        if (ip.size() < 20 || (ip[0] >> 4) != 4) {
            out.skipped_non_ipv4++;
            out.packets.push_back(std::move(pkt));
            continue;
        }
        size_t ihl = static_cast<size_t>(ip[0] & 0xF) * 4;
        uint16_t total_len = read_be16(ip.data() + 2);
        if (ihl < 20 || ip.size() < ihl || total_len < ihl) {
            out.skipped_non_ipv4++;
            out.packets.push_back(std::move(pkt));
            continue;
        }
        size_t ip_payload_len = std::min<size_t>(ip.size(), total_len) - ihl;
        pkt.ipv4 = true;
        pkt.protocol = ip[9];
        pkt.src_ip = read_be32(ip.data() + 12);
        pkt.dst_ip = read_be32(ip.data() + 16);
        ByteSpan l4 = ip.subspan(ihl, ip_payload_len);

        if (pkt.protocol == 6 && l4.size() >= 20) {
            pkt.src_port = read_be16(l4.data());
            pkt.dst_port = read_be16(l4.data() + 2);
            pkt.tcp_seq = read_be32(l4.data() + 4);
            uint8_t flags = l4[13];
            pkt.tcp_syn = flags & 0x02;
            pkt.tcp_ack = flags & 0x10;
            size_t data_off = static_cast<size_t>(l4[12] >> 4) * 4;
            if (data_off >= 20 && data_off <= l4.size())
                pkt.payload.assign(l4.begin() + static_cast<ptrdiff_t>(data_off), l4.end());
        } else if (pkt.protocol == 17 && l4.size() >= 8) {
            pkt.src_port = read_be16(l4.data());
            pkt.dst_port = read_be16(l4.data() + 2);
            pkt.payload.assign(l4.begin() + 8, l4.end());
        } else {
            out.skipped_other_protocol++;
        }
        out.packets.push_back(std::move(pkt));
    }
    return out;
}

std::vector<uint8_t> serialize_packets(const std::vector<Packet>& packets) {
    std::vector<uint8_t> out;
    put_le32(out, kPcapMagicLE);
    put_le16(out, 2);
    put_le16(out, 4);
    put_le32(out, 0);
    put_le32(out, 0);
    put_le32(out, 65535);
    put_le32(out, 1);
    for (const auto& p : packets) {
        put_le32(out, p.ts_sec);
        put_le32(out, p.ts_usec);
        put_le32(out, static_cast<uint32_t>(p.frame.size()));
        put_le32(out, p.orig_len);
        out.insert(out.end(), p.frame.begin(), p.frame.end());
    }
    return out;
}

namespace {

// ------------------------------------------------------------------- dns ---

std::optional<std::string> dns_name(ByteSpan msg, uint64_t& pos, int depth = 0) {
    if (depth > 8) return std::nullopt;
    std::string name;
    uint64_t p = pos;
    bool jumped = false;
    int guard = 0;
    while (true) {
        if (++guard > 128 || p >= msg.size()) return std::nullopt;
        uint8_t len = msg[p];
        if ((len & 0xC0) == 0xC0) {
            if (p + 1 >= msg.size()) return std::nullopt;
            uint64_t target = static_cast<uint64_t>(len & 0x3F) << 8 | msg[p + 1];
            if (!jumped) pos = p + 2;
            jumped = true;
            if (target >= msg.size()) return std::nullopt;
            p = target;
            continue;
        }
        if (len == 0) {
            if (!jumped) pos = p + 1;
            return name;
        }
        if (p + 1 + len > msg.size()) return std::nullopt;
        if (!name.empty()) name.push_back('.');
        for (uint8_t i = 0; i < len; ++i)
            name.push_back(ascii_lower(static_cast<char>(msg[p + 1 + i])));
        p += 1 + len;
    }
}

struct DnsRecord {
    std::string name;
    uint16_t type = 0;
    std::string cname;
    uint32_t addr = 0;
};

std::optional<std::vector<DnsRecord>> parse_dns_message(ByteSpan msg) {
    if (msg.size() < 12) return std::nullopt;
    uint16_t flags = read_be16(msg.data() + 2);
    if ((flags & 0x8000) == 0) return std::nullopt;  // queries are not evidence
    uint16_t qd = read_be16(msg.data() + 4);
    uint16_t an = read_be16(msg.data() + 6);
    uint64_t pos = 12;
    for (uint16_t i = 0; i < qd; ++i) {
        if (!dns_name(msg, pos)) return std::nullopt;
        pos += 4;
        if (pos > msg.size()) return std::nullopt;
    }
    std::vector<DnsRecord> records;
    for (uint16_t i = 0; i < an; ++i) {
        auto name = dns_name(msg, pos);
        if (!name || pos + 10 > msg.size()) return std::nullopt;
        DnsRecord rec;
        rec.name = *name;
        rec.type = read_be16(msg.data() + pos);
        uint16_t rdlen = read_be16(msg.data() + pos + 8);
        pos += 10;
        if (pos + rdlen > msg.size()) return std::nullopt;
        if (rec.type == 1 && rdlen == 4) {
            rec.addr = read_be32(msg.data() + pos);
            pos += rdlen;
        } else if (rec.type == 5) {
            uint64_t cpos = pos;
            auto target = dns_name(msg, cpos);
            if (!target) return std::nullopt;
            rec.cname = *target;
            pos += rdlen;
        } else {
            pos += rdlen;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

// --------------------------------------------------------------- tls sni ---

std::optional<std::string> client_hello_sni(ByteSpan data) {
    // TLS record: type(1) version(2) length(2)
    if (data.size() < 5 || data[0] != 0x16) return std::nullopt;
    size_t rec_len = read_be16(data.data() + 3);
    if (data.size() < 5 + rec_len) return std::nullopt;  // wait for more segments
    ByteSpan hs = data.subspan(5, rec_len);
    if (hs.size() < 4 || hs[0] != 0x01) return std::nullopt;
    size_t hs_len = static_cast<size_t>(hs[1]) << 16 | static_cast<size_t>(hs[2]) << 8 | hs[3];
    if (hs.size() < 4 + hs_len) return std::nullopt;
    ByteSpan body = hs.subspan(4, hs_len);

    size_t pos = 2 + 32;  // legacy version + random
    if (body.size() < pos + 1) return std::nullopt;
    pos += 1 + body[pos];  // session id
    if (body.size() < pos + 2) return std::nullopt;
    size_t ciphers = read_be16(body.data() + pos);
    pos += 2 + ciphers;
    if (body.size() < pos + 1) return std::nullopt;
    pos += 1 + body[pos];  // compression methods
    if (body.size() < pos + 2) return std::nullopt;
    size_t ext_total = read_be16(body.data() + pos);
    pos += 2;
    if (body.size() < pos + ext_total) return std::nullopt;

    size_t ext_end = pos + ext_total;
    while (pos + 4 <= ext_end) {
        uint16_t type = read_be16(body.data() + pos);
        uint16_t len = read_be16(body.data() + pos + 2);
        pos += 4;
        if (pos + len > ext_end) return std::nullopt;
        if (type == 0 && len >= 5) {
            ByteSpan list = body.subspan(pos, len);
            size_t lp = 2;  // server name list length
            while (lp + 3 <= list.size()) {
                uint8_t name_type = list[lp];
                uint16_t name_len = read_be16(list.data() + lp + 1);
                lp += 3;
                if (lp + name_len > list.size()) break;
                if (name_type == 0) {
                    std::string host;
                    for (uint16_t i = 0; i < name_len; ++i)
                        host.push_back(ascii_lower(static_cast<char>(list[lp + i])));
                    return host;
                }
                lp += name_len;
            }
        }
        pos += len;
    }
    return std::nullopt;
}

struct FlowKey {
    uint32_t a_ip, b_ip;
    uint16_t a_port, b_port;
    uint8_t proto;
    bool operator<(const FlowKey& o) const {
        return std::tie(a_ip, a_port, b_ip, b_port, proto) <
               std::tie(o.a_ip, o.a_port, o.b_ip, o.b_port, o.proto);
    }
};

FlowKey key_for(const Packet& p) {
    // Normalized so both directions share a key.
    if (std::tie(p.src_ip, p.src_port) <= std::tie(p.dst_ip, p.dst_port))
        return {p.src_ip, p.dst_ip, p.src_port, p.dst_port, p.protocol};
    return {p.dst_ip, p.src_ip, p.dst_port, p.src_port, p.protocol};
}

struct FlowState {
    bool has_client = false;
    uint32_t client_ip = 0;
    uint16_t client_port = 0;
    uint32_t first_src_ip = 0;
    uint16_t first_src_port = 0;
    uint32_t first_dst_ip = 0;
    uint16_t first_dst_port = 0;
    uint8_t proto = 6;
    uint32_t first_sec = 0, first_usec = 0, last_sec = 0, last_usec = 0;
    bool started = false;

    // Client-to-server reassembly for the ClientHello.
    bool seq_known = false;
    uint32_t next_seq = 0;
    std::vector<uint8_t> client_data;
    bool sni_done = false;
    bool sni_failed = false;
    std::string sni;
    bool ocsp = false;
    size_t order = 0;  // first-seen order, for deterministic output
};

}  // namespace

std::map<std::string, std::set<uint32_t>> extract_dns(const std::vector<Packet>& packets) {
    std::map<std::string, std::set<uint32_t>> out;
    std::map<std::string, std::string> cname;
    for (const auto& p : packets) {
        if (!p.ipv4 || p.protocol != 17 || p.src_port != 53 || p.payload.empty()) continue;
        auto records = parse_dns_message(ByteSpan{p.payload.data(), p.payload.size()});
        if (!records) continue;
        for (const auto& rec : *records) {
            if (rec.type == 1)
                out[rec.name].insert(rec.addr);
            else if (rec.type == 5 && !rec.cname.empty())
                cname[rec.name] = rec.cname;
        }
    }
    // Resolve CNAME chains onto terminal A records.
    for (const auto& [name, target] : cname) {
        std::string cur = target;
        for (int hops = 0; hops < 16; ++hops) {
            auto a = out.find(cur);
            if (a != out.end()) {
                out[name].insert(a->second.begin(), a->second.end());
                break;
            }
            auto next = cname.find(cur);
            if (next == cname.end()) break;
            cur = next->second;
        }
    }
    return out;
}

NetAnalysis analyze_packets(const std::vector<Packet>& packets) {
    NetAnalysis out;
    std::map<FlowKey, FlowState> flows;
    size_t order = 0;

    uint64_t dns_total = 0, dns_ok = 0;
    for (const auto& p : packets) {
        if (!p.ipv4 || p.protocol != 17 || p.src_port != 53 || p.payload.empty()) continue;
        ++dns_total;
        if (parse_dns_message(ByteSpan{p.payload.data(), p.payload.size()})) ++dns_ok;
    }
    out.dns_skipped = dns_total - dns_ok;
    out.dns = extract_dns(packets);

    for (const auto& p : packets) {
        if (!p.ipv4 || (p.protocol != 6 && p.protocol != 17)) continue;
        FlowState& f = flows[key_for(p)];
        if (!f.started) {
            f.started = true;
            f.proto = p.protocol;
            f.first_src_ip = p.src_ip;
            f.first_src_port = p.src_port;
            f.first_dst_ip = p.dst_ip;
            f.first_dst_port = p.dst_port;
            f.first_sec = p.ts_sec;
            f.first_usec = p.ts_usec;
            f.order = order++;
        }
        f.last_sec = p.ts_sec;
        f.last_usec = p.ts_usec;

        if (p.protocol == 6 && p.tcp_syn && !p.tcp_ack && !f.has_client) {
            f.has_client = true;
            f.client_ip = p.src_ip;
            f.client_port = p.src_port;
        }

        bool from_client = f.has_client
                               ? (p.src_ip == f.client_ip && p.src_port == f.client_port)
                               : (p.src_port > p.dst_port ||
                                  (p.src_port == p.dst_port && p.src_ip == f.first_src_ip));

        if (p.protocol == 6 && from_client && !p.payload.empty() && !f.sni_done &&
            !f.sni_failed) {
            if (!f.seq_known) {
                f.seq_known = true;
                f.next_seq = p.tcp_seq;
            }
            if (p.tcp_seq == f.next_seq) {
                size_t room = kMaxReassembly - std::min(kMaxReassembly, f.client_data.size());
                size_t take = std::min(room, p.payload.size());
                f.client_data.insert(f.client_data.end(), p.payload.begin(),
                                     p.payload.begin() + static_cast<ptrdiff_t>(take));
                f.next_seq += static_cast<uint32_t>(p.payload.size());
            } else if (p.tcp_seq > f.next_seq) {
                f.sni_failed = true;  // out-of-order beyond the window; skipped
            }
            if (!f.client_data.empty() && f.client_data[0] != 0x16) {
                // Plain protocols: check for OCSP requests over HTTP.
                std::string_view head = as_text(
                    ByteSpan{f.client_data.data(), std::min<size_t>(f.client_data.size(), 512)});
                if ((head.starts_with("GET ") || head.starts_with("POST ")) &&
                    p.dst_port == 80) {
                    size_t eol = head.find("\r\n");
                    if (icontains(head.substr(0, eol == std::string_view::npos ? head.size()
                                                                               : eol),
                                  "ocsp"))
                        f.ocsp = true;
                }
                f.sni_failed = true;
            } else if (auto sni = client_hello_sni(
                           ByteSpan{f.client_data.data(), f.client_data.size()})) {
                f.sni = *sni;
                f.sni_done = true;
            } else if (f.client_data.size() >= kMaxReassembly) {
                f.sni_failed = true;
            }
        }
    }

    std::vector<const FlowState*> ordered;
    std::vector<FlowKey> keys;
    for (auto& [k, f] : flows) ordered.push_back(&f);
    std::sort(ordered.begin(), ordered.end(),
              [](const FlowState* a, const FlowState* b) { return a->order < b->order; });

    for (const FlowState* f : ordered) {
        FlowObservation obs;
        obs.transport = f->proto;
        if (f->has_client) {
            obs.client_ip = f->client_ip;
            obs.client_port = f->client_port;
            obs.server_ip = f->client_ip == f->first_src_ip && f->client_port == f->first_src_port
                                ? f->first_dst_ip
                                : f->first_src_ip;
            obs.server_port =
                f->client_ip == f->first_src_ip && f->client_port == f->first_src_port
                    ? f->first_dst_port
                    : f->first_src_port;
        } else if (f->first_src_port >= f->first_dst_port) {
            obs.client_ip = f->first_src_ip;
            obs.client_port = f->first_src_port;
            obs.server_ip = f->first_dst_ip;
            obs.server_port = f->first_dst_port;
        } else {
            obs.client_ip = f->first_dst_ip;
            obs.client_port = f->first_dst_port;
            obs.server_ip = f->first_src_ip;
            obs.server_port = f->first_src_port;
        }
        obs.first_seen_sec = f->first_sec;
        obs.first_seen_usec = f->first_usec;
        obs.last_seen_sec = f->last_sec;
        obs.last_seen_usec = f->last_usec;
        obs.sni = f->sni;
        out.flows.push_back(std::move(obs));
        if (f->sni_failed && !f->sni_done && f->proto == 6) out.sni_skipped++;
        if (f->ocsp) out.ocsp_observed = true;
    }
    return out;
}

std::vector<std::pair<FlowObservation, std::string>> extract_sni(
    const std::vector<Packet>& packets) {
    std::vector<std::pair<FlowObservation, std::string>> out;
    for (const auto& flow : analyze_packets(packets).flows)
        if (!flow.sni.empty()) out.emplace_back(flow, flow.sni);
    return out;
}

std::set<std::string> matched_hostnames(const NetAnalysis& analysis, const Catalog& catalog) {
    std::set<std::string> matched;
    for (const auto& rule : catalog.rules()) {
        if (rule.kind != RuleKind::hostname) continue;
        std::string host = rule.payload.value("host", "");
        for (const auto& flow : analysis.flows)
            if (!flow.sni.empty() && hostname_matches(host, flow.sni))
                matched.insert(ascii_lower(host));
        for (const auto& [name, addrs] : analysis.dns)
            if (hostname_matches(host, name)) matched.insert(ascii_lower(host));
    }
    return matched;
}

std::vector<Finding> match_indicators(const NetAnalysis& analysis, const Catalog& catalog,
                                      const EvidenceSource& source) {
    std::vector<Finding> findings;

    auto in_any_range = [&](uint32_t addr) {
        for (const auto& rule : catalog.rules()) {
            if (rule.kind != RuleKind::ip_range) continue;
            auto low = parse_ipv4(rule.payload.value("low", ""));
            auto high = parse_ipv4(rule.payload.value("high", ""));
            if (low && high && addr >= *low && addr <= *high) return true;
        }
        return false;
    };

    for (const auto& rule : catalog.rules()) {
        if (rule.kind == RuleKind::ip_range) {
            auto low = parse_ipv4(rule.payload.value("low", ""));
            auto high = parse_ipv4(rule.payload.value("high", ""));
            if (!low || !high) continue;
            std::string label = rule.payload.value("label", "");
            std::set<uint32_t> hit;
            for (const auto& flow : analysis.flows) {
                uint32_t addr = flow.server_ip;
                if (addr < *low || addr > *high || !hit.insert(addr).second) continue;
                std::set<std::string> channels{"ip-range"};
                for (const auto& [name, addrs] : analysis.dns)
                    if (addrs.count(addr) && hostname_matches(label, name))
                        channels.insert("dns");
                for (const auto& other : analysis.flows)
                    if (other.server_ip == addr && !other.sni.empty() &&
                        hostname_matches(label, other.sni))
                        channels.insert("sni");
                Finding f;
                f.rule_id = rule.rule_id;
                f.category = rule.category;
                f.platform = rule.platform;
                f.confidence = rule.confidence;
                f.source = source;
                f.set_attr("ip", format_ipv4(addr));
                if (!label.empty()) f.set_attr("hostname", label);
                std::string joined;
                for (const auto& c : channels) joined += (joined.empty() ? "" : ",") + c;
                f.set_attr("channels", joined);
                findings.push_back(std::move(f));
            }
        } else if (rule.kind == RuleKind::hostname) {
            std::string host = rule.payload.value("host", "");
            bool via_sni = false, via_dns = false;
            std::set<uint32_t> addrs;
            for (const auto& flow : analysis.flows) {
                if (!flow.sni.empty() && hostname_matches(host, flow.sni)) {
                    via_sni = true;
                    addrs.insert(flow.server_ip);
                }
            }
            for (const auto& [name, dns_addrs] : analysis.dns) {
                if (hostname_matches(host, name)) {
                    via_dns = true;
                    addrs.insert(dns_addrs.begin(), dns_addrs.end());
                }
            }
            if (!via_sni && !via_dns) continue;
            bool corroborated = std::any_of(addrs.begin(), addrs.end(), in_any_range);
            Finding f;
            f.rule_id = rule.rule_id;
            f.category = rule.category;
            f.platform = rule.platform;
            f.confidence = corroborated ? rule.confidence : Confidence::medium;
            f.source = source;
            f.set_attr("hostname", ascii_lower(host));
            std::string channels;
            if (via_dns) channels = "dns";
            if (via_sni) channels += channels.empty() ? "sni" : ",sni";
            f.set_attr("channels", channels);
            if (!addrs.empty()) {
                std::string joined;
                for (uint32_t a : addrs) joined += (joined.empty() ? "" : ",") + format_ipv4(a);
                f.set_attr("ips", joined);
            }
            findings.push_back(std::move(f));
        }
    }
    return findings;
}

std::string_view to_string(UsageMode m) {
    switch (m) {
        case UsageMode::web_interface: return "web-interface";
        case UsageMode::client_app: return "client-app";
        case UsageMode::indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

UsageModeVerdict infer_usage_mode(const std::set<std::string>& hostnames,
                                  const NetAnalysis& analysis, const Catalog& catalog) {
    UsageModeVerdict v;
    v.ocsp_observed = analysis.ocsp_observed;
    v.evidence.assign(hostnames.begin(), hostnames.end());

    bool web = false, core = false;
    for (const auto& rule : catalog.rules()) {
        if (rule.kind != RuleKind::hostname) continue;
        std::string host = ascii_lower(rule.payload.value("host", ""));
        if (!hostnames.count(host)) continue;
        std::string marker = rule.payload.value("mode_marker", "");
        if (marker == "web") web = true;
        if (marker == "core") core = true;
    }
    v.mode = web ? UsageMode::web_interface
                 : core ? UsageMode::client_app : UsageMode::indeterminate;
    return v;
}

std::optional<Finding> usage_mode_finding(const UsageModeVerdict& verdict,
                                          const Catalog& catalog,
                                          const EvidenceSource& source) {
    if (verdict.mode == UsageMode::indeterminate) return std::nullopt;
    const CatalogRule* anchor = nullptr;
    for (const auto& rule : catalog.rules()) {
        if (rule.kind != RuleKind::hostname) continue;
        std::string host = ascii_lower(rule.payload.value("host", ""));
        std::string marker = rule.payload.value("mode_marker", "");
        bool matched = std::find(verdict.evidence.begin(), verdict.evidence.end(), host) !=
                       verdict.evidence.end();
        if (!matched) continue;
        if (verdict.mode == UsageMode::web_interface && marker == "web") {
            anchor = &rule;
            break;
        }
        if (verdict.mode == UsageMode::client_app && marker == "core") {
            anchor = &rule;
            break;
        }
    }
    if (anchor == nullptr) return std::nullopt;

    Finding f;
    f.rule_id = anchor->rule_id;
    f.category = Category::network_indicator;
    f.platform = anchor->platform;
    f.confidence = anchor->confidence;
    f.source = source;
    f.set_attr("usage-mode", std::string(to_string(verdict.mode)));
    f.set_attr("ocsp-observed", verdict.ocsp_observed ? "true" : "false");
    std::string joined;
    for (const auto& h : verdict.evidence) joined += (joined.empty() ? "" : ";") + h;
    if (!joined.empty()) f.set_attr("evidence", joined);
    return f;
}

}  // namespace onetrace
