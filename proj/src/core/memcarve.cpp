#include "memcarve.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include "bytes.hpp"

namespace onetrace {

std::string_view to_string(Encoding e) {
    return e == Encoding::ascii ? "ascii" : "utf16le";
}

std::string_view to_string(OperationTag t) {
    switch (t) {
        case OperationTag::none: return "";
        case OperationTag::upload: return "upload";
        case OperationTag::download_open: return "download-open";
        case OperationTag::del: return "delete";
        case OperationTag::sync: return "sync";
        case OperationTag::login: return "login";
    }
    return "";
}

std::optional<OperationTag> operation_tag_from(std::string_view s) {
    if (s.empty()) return OperationTag::none;
    if (s == "upload") return OperationTag::upload;
    if (s == "download-open") return OperationTag::download_open;
    if (s == "delete") return OperationTag::del;
    if (s == "sync") return OperationTag::sync;
    if (s == "login") return OperationTag::login;
    return std::nullopt;
}

std::optional<CaptureTransform> capture_transform_from(std::string_view s) {
    if (s.empty() || s == "none") return CaptureTransform::none;
    if (s == "percent-decode") return CaptureTransform::percent_decode;
    if (s == "strip-crlf") return CaptureTransform::strip_crlf;
    if (s == "trim") return CaptureTransform::trim;
    if (s == "email-token") return CaptureTransform::email_token;
    return std::nullopt;
}

std::string apply_capture_transform(CaptureTransform t, std::string_view raw) {
    switch (t) {
        case CaptureTransform::none:
            return std::string(raw);
        case CaptureTransform::percent_decode:
            return percent_decode(raw);
        case CaptureTransform::strip_crlf: {
            std::string out;
            out.reserve(raw.size());
            for (char c : raw)
                if (c != '\r' && c != '\n') out.push_back(c);
            return out;
        }
        case CaptureTransform::trim: {
            std::string_view v = trim_view(raw);
            if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
                v = v.substr(1, v.size() - 2);
            return std::string(v);
        }
        case CaptureTransform::email_token: {
            auto is_local = [](char c) {
                return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                       (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '%' ||
                       c == '+' || c == '-';
            };
            auto is_domain = [](char c) {
                return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                       (c >= '0' && c <= '9') || c == '.' || c == '-';
            };
            size_t at = raw.rfind('@');
            while (at != std::string_view::npos) {
                size_t lo = at;
                while (lo > 0 && is_local(raw[lo - 1])) --lo;
                size_t hi = at + 1;
                while (hi < raw.size() && is_domain(raw[hi])) ++hi;
                std::string_view domain = raw.substr(at + 1, hi - at - 1);
                if (lo < at && domain.find('.') != std::string_view::npos)
                    return std::string(raw.substr(lo, hi - lo));
                at = (at == 0) ? std::string_view::npos : raw.rfind('@', at - 1);
            }
            return {};
        }
    }
    return std::string(raw);
}

Result<void> validate_signature(const Signature& s) {
    auto err = [&](const std::string& why) {
        return make_error("invalid-signature", "signature '" + s.rule_id + "': " + why);
    };
    if (s.anchor.empty()) return err("anchor must be non-empty");
    if (!s.scan_ascii && !s.scan_utf16le) return err("no encodings enabled");
    for (const auto& c : s.captures) {
        if (c.name.empty()) return err("capture with empty name");
        if (c.terminators.empty()) return err("capture '" + c.name + "' has no terminators");
        if (c.max_len < 1 || c.max_len > 256)
            return err("capture '" + c.name + "' max_len out of [1, 256]");
    }
    return {};
}

Result<std::vector<Signature>> signatures_from_catalog(const Catalog& catalog) {
    std::vector<Signature> sigs;
    for (const auto& r : catalog.rules()) {
        if (r.kind != RuleKind::memory_signature) continue;
        const auto& p = r.payload;
        Signature s;
        s.rule_id = r.rule_id;
        s.category = r.category;
        s.platform = r.platform;
        s.confidence = r.confidence;
        s.anchor = p.value("anchor", "");
        auto op = operation_tag_from(p.value("operation", ""));
        if (!op)
            return make_error("validation-error",
                              "rule '" + r.rule_id + "': unknown operation tag");
        s.operation = *op;
        if (auto it = p.find("encodings"); it != p.end() && it->is_array()) {
            s.scan_ascii = false;
            s.scan_utf16le = false;
            for (const auto& e : *it) {
                if (e == "ascii") s.scan_ascii = true;
                if (e == "utf16le") s.scan_utf16le = true;
            }
        }
        s.requires_before = p.value("requires_before", "");
        s.requires_before_window = p.value("requires_before_window", 0u);
        if (auto it = p.find("captures"); it != p.end() && it->is_array()) {
            for (const auto& jc : *it) {
                CaptureSpec c;
                c.name = jc.value("name", "");
                c.before = jc.value("direction", "after") == std::string("before");
                c.marker = jc.value("marker", "");
                for (const auto& t : jc["terminators"])
                    c.terminators.push_back(static_cast<uint8_t>(t.get<int>()));
                c.max_len = jc.value("max_len", 64u);
                c.window = jc.value("window", 0u);
                c.required = jc.value("required", true);
                auto tr = capture_transform_from(jc.value("transform", ""));
                if (!tr)
                    return make_error("validation-error",
                                      "rule '" + r.rule_id + "': unknown capture transform");
                c.transform = *tr;
                c.confirm = jc.value("confirm", "");
                c.confirm_window = jc.value("confirm_window", 0u);
                s.captures.push_back(std::move(c));
            }
        }
        if (auto v = validate_signature(s); !v) return v.error();
        sigs.push_back(std::move(s));
    }
    return sigs;
}

const std::vector<Signature>& builtin_signatures() {
    static const std::vector<Signature> sigs = [] {
        auto r = signatures_from_catalog(builtin_catalog());
        return r.ok() ? std::move(r.value()) : std::vector<Signature>{};
    }();
    return sigs;
}

const std::string* CarveHit::capture(std::string_view name) const {
    for (const auto& [k, v] : captures)
        if (k == name) return &v;
    return nullptr;
}

std::vector<uint8_t> encode_literal(std::string_view lit, Encoding enc) {
    std::vector<uint8_t> out;
    if (enc == Encoding::ascii) {
        out.assign(lit.begin(), lit.end());
    } else {
        out.reserve(lit.size() * 2);
        for (char c : lit) {
            out.push_back(static_cast<uint8_t>(c));
            out.push_back(0);
        }
    }
    return out;
}

Result<void> MemorySource::read(uint64_t offset, uint8_t* out, uint64_t len) const {
    if (offset + len > data_.size())
        return make_error("io-error", "read past end of buffer", offset);
    std::copy_n(data_.data() + offset, len, out);
    return {};
}

const uint8_t* MemorySource::view(uint64_t offset, uint64_t len) const {
    if (offset + len > data_.size()) return nullptr;
    return data_.data() + offset;
}

Result<FileSource> FileSource::open(const std::filesystem::path& path) {
    std::error_code ec;
    auto sz = std::filesystem::file_size(path, ec);
    if (ec) return make_error("io-error", "cannot stat '" + path.string() + "': " + ec.message());
    return FileSource(path, sz);
}

Result<void> FileSource::read(uint64_t offset, uint8_t* out, uint64_t len) const {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return make_error("io-error", "cannot open '" + path_.string() + "'");
    in.seekg(static_cast<std::streamoff>(offset));
    in.read(reinterpret_cast<char*>(out), static_cast<std::streamsize>(len));
    if (in.gcount() != static_cast<std::streamsize>(len))
        return make_error("io-error", "short read from '" + path_.string() + "'",
                          offset + static_cast<uint64_t>(std::max<std::streamsize>(in.gcount(), 0)));
    return {};
}

namespace {

// One signature compiled for one encoding.
struct CompiledSig {
    const Signature* sig = nullptr;
    Encoding encoding = Encoding::ascii;
    std::vector<uint8_t> anchor;
    std::vector<uint8_t> requires_before;
    struct CompiledCapture {
        const CaptureSpec* spec = nullptr;
        std::vector<uint8_t> marker;
        std::vector<uint8_t> confirm;
    };
    std::vector<CompiledCapture> captures;
    uint64_t before_extent = 0;  // bytes that may be inspected before the anchor
    uint64_t after_extent = 0;   // bytes that may be inspected after anchor start
};

uint64_t unit_size(Encoding e) { return e == Encoding::ascii ? 1 : 2; }

CompiledSig compile(const Signature& sig, Encoding enc) {
    CompiledSig c;
    c.sig = &sig;
    c.encoding = enc;
    c.anchor = encode_literal(sig.anchor, enc);
    c.requires_before = encode_literal(sig.requires_before, enc);
    uint64_t u = unit_size(enc);
    uint64_t before = sig.requires_before.empty()
                          ? 0
                          : (sig.requires_before_window + sig.requires_before.size()) * u;
    uint64_t after = c.anchor.size();
    for (const auto& cap : sig.captures) {
        CompiledSig::CompiledCapture cc;
        cc.spec = &cap;
        cc.marker = encode_literal(cap.marker, enc);
        cc.confirm = encode_literal(cap.confirm, enc);
        uint64_t reach =
            (cap.window + cap.marker.size() + cap.max_len + cap.confirm_window +
             cap.confirm.size() + 2) * u;
        if (cap.before)
            before = std::max(before, reach);
        else
            after = std::max(after, c.anchor.size() + reach);
        // A before-capture's value may run forward past the anchor.
        if (cap.before) after = std::max(after, c.anchor.size() + (cap.max_len + 2) * u);
        c.captures.push_back(std::move(cc));
    }
    c.before_extent = before;
    c.after_extent = after;
    return c;
}

bool is_terminator(const CaptureSpec& spec, uint8_t b) {
    return std::find(spec.terminators.begin(), spec.terminators.end(), b) !=
           spec.terminators.end();
}

// Reads a capture value starting at `pos`, honouring the encoding's unit
// size. Returns the raw value and the end position of the last unit read.
struct RawCapture {
    std::string value;
    uint64_t end = 0;
};

RawCapture read_value(ByteSpan data, uint64_t pos, Encoding enc, const CaptureSpec& spec) {
    RawCapture out;
    uint64_t u = unit_size(enc);
    uint64_t p = pos;
    while (out.value.size() < spec.max_len && p + u <= data.size()) {
        uint8_t b = data[p];
        if (enc == Encoding::utf16le && data[p + 1] != 0) break;
        if (is_terminator(spec, b)) break;
        out.value.push_back(static_cast<char>(b));
        p += u;
    }
    out.end = p;
    return out;
}

std::optional<uint64_t> find_forward(ByteSpan data, uint64_t from, uint64_t to,
                                     const std::vector<uint8_t>& needle) {
    if (needle.empty() || from >= data.size()) return std::nullopt;
    to = std::min<uint64_t>(to, data.size());
    if (from + needle.size() > to) return std::nullopt;
    auto begin = data.begin() + static_cast<ptrdiff_t>(from);
    auto end = data.begin() + static_cast<ptrdiff_t>(to);
    auto it = std::search(begin, end, needle.begin(), needle.end());
    if (it == end) return std::nullopt;
    return static_cast<uint64_t>(it - data.begin());
}

// Rightmost occurrence whose start lies in [from, to).
std::optional<uint64_t> find_backward(ByteSpan data, uint64_t from, uint64_t to,
                                      const std::vector<uint8_t>& needle) {
    if (needle.empty()) return std::nullopt;
    to = std::min<uint64_t>(to, data.size());
    if (to < needle.size() || from + needle.size() > to) return std::nullopt;
    for (uint64_t start = to - needle.size() + 1; start-- > from;) {
        if (std::equal(needle.begin(), needle.end(), data.begin() + static_cast<ptrdiff_t>(start)))
            return start;
    }
    return std::nullopt;
}

// Attempts a full hit for an anchor match at `pos` (relative to `data`).
// `base` converts relative positions to absolute image offsets.
std::optional<CarveHit> try_hit(ByteSpan data, uint64_t pos, uint64_t base,
                                const CompiledSig& cs) {
    const Signature& sig = *cs.sig;
    uint64_t u = unit_size(cs.encoding);
    uint64_t anchor_end = pos + cs.anchor.size();

    if (!cs.requires_before.empty()) {
        uint64_t window = (sig.requires_before_window + sig.requires_before.size()) * u;
        uint64_t from = pos > window ? pos - window : 0;
        if (!find_backward(data, from, pos, cs.requires_before)) return std::nullopt;
    }

    CarveHit hit;
    hit.rule_id = sig.rule_id;
    hit.offset = base + pos;
    hit.encoding = cs.encoding;
    uint64_t span_end = anchor_end;

    for (const auto& cc : cs.captures) {
        const CaptureSpec& spec = *cc.spec;
        std::optional<RawCapture> raw;
        if (!spec.before) {
            uint64_t start = anchor_end;
            if (!cc.marker.empty()) {
                uint64_t limit = anchor_end + (spec.window + spec.marker.size()) * u +
                                 cc.marker.size();
                auto m = find_forward(data, anchor_end, limit, cc.marker);
                if (m)
                    start = *m + cc.marker.size();
                else
                    start = UINT64_MAX;
            }
            if (start != UINT64_MAX) raw = read_value(data, start, cs.encoding, spec);
        } else if (!cc.marker.empty()) {
            uint64_t window = (spec.window + spec.marker.size()) * u + cc.marker.size();
            uint64_t from = pos > window ? pos - window : 0;
            auto m = find_backward(data, from, pos, cc.marker);
            if (m) raw = read_value(data, *m + cc.marker.size(), cs.encoding, spec);
        } else {
            // No marker: take the run of units immediately before the anchor,
            // stopping at a terminator or the length cap.
            uint64_t start = pos;
            uint32_t units = 0;
            while (start >= u && units < spec.max_len) {
                uint8_t b = data[start - u];
                if (cs.encoding == Encoding::utf16le && data[start - 1] != 0) break;
                if (is_terminator(spec, b)) break;
                start -= u;
                ++units;
            }
            RawCapture rc;
            for (uint64_t p = start; p < pos; p += u)
                rc.value.push_back(static_cast<char>(data[p]));
            rc.end = pos;
            raw = rc;
        }

        bool ok = raw.has_value();
        std::string value;
        if (ok) {
            if (!cc.confirm.empty()) {
                uint64_t limit = raw->end + spec.confirm_window * u + cc.confirm.size();
                ok = find_forward(data, raw->end, limit, cc.confirm).has_value();
            }
            if (ok) {
                value = apply_capture_transform(spec.transform, raw->value);
                ok = !value.empty();
            }
        }
        if (!ok) {
            if (spec.required) return std::nullopt;
            continue;
        }
        span_end = std::max(span_end, raw->end);
        hit.captures.emplace_back(spec.name, std::move(value));
    }

    hit.span_length = span_end - pos;
    return hit;
}

void scan_region(ByteSpan data, uint64_t base, uint64_t own_from, uint64_t own_to,
                 const std::vector<CompiledSig>& sigs, std::vector<CarveHit>& out) {
    for (const auto& cs : sigs) {
        if (cs.anchor.empty()) continue;
        auto searcher = std::boyer_moore_horspool_searcher(cs.anchor.begin(), cs.anchor.end());
        uint64_t rel_from = own_from - base;
        uint64_t rel_to = std::min<uint64_t>(own_to - base + cs.after_extent, data.size());
        auto begin = data.begin() + static_cast<ptrdiff_t>(rel_from);
        auto end = data.begin() + static_cast<ptrdiff_t>(rel_to);
        while (begin < end) {
            auto it = std::search(begin, end, searcher);
            if (it == end) break;
            uint64_t rel = static_cast<uint64_t>(it - data.begin());
            uint64_t abs = base + rel;
            if (abs >= own_to) break;
            if (abs >= own_from) {
                if (auto hit = try_hit(data, rel, base, cs)) out.push_back(std::move(*hit));
            }
            begin = it + 1;
        }
    }
}

bool hit_order(const CarveHit& a, const CarveHit& b) {
    if (a.offset != b.offset) return a.offset < b.offset;
    if (a.rule_id != b.rule_id) return a.rule_id < b.rule_id;
    return a.encoding < b.encoding;
}

}  // namespace

Result<std::vector<CarveHit>> carve(const ByteSource& image,
                                    const std::vector<Signature>& signatures,
                                    const CarveParams& params) {
    for (const auto& s : signatures)
        if (auto v = validate_signature(s); !v) return v.error();

    std::vector<CompiledSig> compiled;
    uint64_t before_margin = 0;
    uint64_t required_overlap = 0;
    for (const auto& s : signatures) {
        if (s.scan_ascii) compiled.push_back(compile(s, Encoding::ascii));
        if (s.scan_utf16le) compiled.push_back(compile(s, Encoding::utf16le));
    }
    for (const auto& cs : compiled) {
        before_margin = std::max(before_margin, cs.before_extent);
        required_overlap = std::max(required_overlap, cs.after_extent);
    }

    if (params.chunk_size < 2 * params.overlap)
        return make_error("invalid-params", "chunk_size must be at least twice the overlap");
    if (params.overlap < required_overlap)
        return make_error("invalid-params",
                          "overlap " + std::to_string(params.overlap) +
                              " is below the required minimum " +
                              std::to_string(required_overlap) + " for these signatures");

    const uint64_t size = image.size();
    const uint64_t n_chunks = size == 0 ? 0 : (size + params.chunk_size - 1) / params.chunk_size;
    const int jobs = std::max(1, params.jobs);

    std::vector<std::vector<CarveHit>> per_chunk(n_chunks);
    std::atomic<uint64_t> next{0};
    std::mutex err_mutex;
    std::optional<Error> first_error;

    auto worker = [&]() {
        std::vector<uint8_t> buf;
        while (true) {
            uint64_t i = next.fetch_add(1);
            if (i >= n_chunks) return;
            uint64_t own_from = i * params.chunk_size;
            uint64_t own_to = std::min(size, own_from + params.chunk_size);
            uint64_t read_from = own_from > before_margin ? own_from - before_margin : 0;
            uint64_t read_to = std::min(size, own_to + params.overlap);
            uint64_t len = read_to - read_from;

            const uint8_t* p = image.view(read_from, len);
            if (p == nullptr) {
                buf.resize(len);
                auto r = image.read(read_from, buf.data(), len);
                if (!r) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = r.error();
                    return;
                }
                p = buf.data();
            }
            scan_region(ByteSpan{p, len}, read_from, own_from, own_to, compiled, per_chunk[i]);
        }
    };

    if (jobs == 1 || n_chunks <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        int n = std::min<int>(jobs, static_cast<int>(n_chunks));
        threads.reserve(static_cast<size_t>(n));
        for (int t = 0; t < n; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    if (first_error) return *first_error;

    std::vector<CarveHit> hits;
    for (auto& chunk : per_chunk)
        for (auto& h : chunk) hits.push_back(std::move(h));
    std::sort(hits.begin(), hits.end(), hit_order);
    hits.erase(std::unique(hits.begin(), hits.end(),
                           [](const CarveHit& a, const CarveHit& b) {
                               return a.offset == b.offset && a.rule_id == b.rule_id;
                           }),
               hits.end());
    return hits;
}

std::vector<Finding> hits_to_findings(const std::vector<CarveHit>& hits,
                                      const EvidenceSource& image_source,
                                      const Catalog& catalog) {
    std::vector<Finding> findings;
    for (const auto& hit : hits) {
        const CatalogRule* rule = catalog.find(hit.rule_id);
        if (rule == nullptr) continue;
        Finding f;
        f.rule_id = hit.rule_id;
        f.category = rule->category;
        f.platform = rule->platform;
        f.confidence = rule->confidence;
        f.source = image_source;
        f.source.byte_range = ByteRange{hit.offset, hit.span_length};
        for (const auto& [name, value] : hit.captures) f.set_attr(name, value);
        if (const auto* suffix = hit.capture("openid-suffix"))
            f.set_attr("openid-url", "https://login.ubuntu.com/+id/" + *suffix);
        std::string op = rule->payload.value("operation", "");
        if (!op.empty() && rule->category == Category::file_activity)
            f.set_attr("operation", op);
        f.set_attr("encoding", std::string(to_string(hit.encoding)));
        findings.push_back(std::move(f));
    }
    return findings;
}

}  // namespace onetrace
