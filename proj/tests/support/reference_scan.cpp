#include "reference_scan.hpp"

#include <algorithm>
#include <array>

namespace onetrace::testsupport {

namespace {

struct RefPattern {
    const Signature* sig;
    Encoding enc;
    std::vector<uint8_t> anchor;
};

std::vector<uint8_t> encode(std::string_view lit, Encoding enc) {
    std::vector<uint8_t> out;
    for (char c : lit) {
        out.push_back(static_cast<uint8_t>(c));
        if (enc == Encoding::utf16le) out.push_back(0);
    }
    return out;
}

size_t unit(Encoding e) { return e == Encoding::ascii ? 1 : 2; }

bool term(const CaptureSpec& c, uint8_t b) {
    return std::find(c.terminators.begin(), c.terminators.end(), b) != c.terminators.end();
}

bool bytes_at(ByteSpan data, size_t pos, const std::vector<uint8_t>& what) {
    if (pos + what.size() > data.size()) return false;
    return std::equal(what.begin(), what.end(), data.begin() + static_cast<ptrdiff_t>(pos));
}

// Forward search for `what` starting in [from, to]; first occurrence.
std::optional<size_t> fwd(ByteSpan data, size_t from, size_t to,
                          const std::vector<uint8_t>& what) {
    for (size_t p = from; p <= to && p + what.size() <= data.size(); ++p)
        if (bytes_at(data, p, what)) return p;
    return std::nullopt;
}

// Backward search: occurrence nearest `to`, starting at or after `from`.
std::optional<size_t> bwd(ByteSpan data, size_t from, size_t to,
                          const std::vector<uint8_t>& what) {
    if (what.empty() || to < what.size()) return std::nullopt;
    for (size_t p = to - what.size() + 1; p-- > from;)
        if (bytes_at(data, p, what)) return p;
    return std::nullopt;
}

struct Value {
    std::string raw;
    size_t end;
};

Value value_at(ByteSpan data, size_t pos, Encoding enc, const CaptureSpec& spec) {
    Value v{std::string(), pos};
    size_t u = unit(enc);
    while (v.raw.size() < spec.max_len && v.end + u <= data.size()) {
        uint8_t b = data[v.end];
        if (enc == Encoding::utf16le && data[v.end + 1] != 0) break;
        if (term(spec, b)) break;
        v.raw.push_back(static_cast<char>(b));
        v.end += u;
    }
    return v;
}

std::optional<CarveHit> hit_at(ByteSpan data, size_t pos, const RefPattern& pat) {
    const Signature& sig = *pat.sig;
    size_t u = unit(pat.enc);
    size_t anchor_end = pos + pat.anchor.size();

    if (!sig.requires_before.empty()) {
        auto needle = encode(sig.requires_before, pat.enc);
        size_t window = (sig.requires_before_window + sig.requires_before.size()) * u;
        size_t from = pos > window ? pos - window : 0;
        if (!bwd(data, from, pos, needle)) return std::nullopt;
    }

    CarveHit hit;
    hit.rule_id = sig.rule_id;
    hit.offset = pos;
    hit.encoding = pat.enc;
    size_t span_end = anchor_end;

    for (const auto& spec : sig.captures) {
        auto marker = encode(spec.marker, pat.enc);
        std::optional<Value> value;
        if (!spec.before) {
            if (marker.empty()) {
                value = value_at(data, anchor_end, pat.enc, spec);
            } else {
                size_t last_start = anchor_end + (spec.window + spec.marker.size()) * u;
                if (auto m = fwd(data, anchor_end, last_start, marker))
                    value = value_at(data, *m + marker.size(), pat.enc, spec);
            }
        } else if (!marker.empty()) {
            size_t window = (spec.window + spec.marker.size()) * u + marker.size();
            size_t from = pos > window ? pos - window : 0;
            if (auto m = bwd(data, from, pos, marker))
                value = value_at(data, *m + marker.size(), pat.enc, spec);
        } else {
            size_t start = pos;
            size_t units = 0;
            while (start >= u && units < spec.max_len) {
                uint8_t b = data[start - u];
                if (pat.enc == Encoding::utf16le && data[start - 1] != 0) break;
                if (term(spec, b)) break;
                start -= u;
                ++units;
            }
            Value v{std::string(), pos};
            for (size_t p = start; p < pos; p += u) v.raw.push_back(static_cast<char>(data[p]));
            value = v;
        }

        bool ok = value.has_value();
        std::string final_value;
        if (ok && !spec.confirm.empty()) {
            auto confirm = encode(spec.confirm, pat.enc);
            size_t limit = value->end + spec.confirm_window * u + confirm.size();
            ok = fwd(data, value->end, limit > confirm.size() ? limit - confirm.size() : 0,
                     confirm)
                     .has_value();
        }
        if (ok) {
            final_value = apply_capture_transform(spec.transform, value->raw);
            ok = !final_value.empty();
        }
        if (!ok) {
            if (spec.required) return std::nullopt;
            continue;
        }
        span_end = std::max(span_end, value->end);
        hit.captures.emplace_back(spec.name, std::move(final_value));
    }
    hit.span_length = span_end - pos;
    return hit;
}

}  // namespace

std::vector<CarveHit> reference_scan(ByteSpan image, const std::vector<Signature>& signatures) {
    std::vector<RefPattern> patterns;
    for (const auto& sig : signatures) {
        if (sig.scan_ascii) patterns.push_back({&sig, Encoding::ascii, encode(sig.anchor, Encoding::ascii)});
        if (sig.scan_utf16le)
            patterns.push_back({&sig, Encoding::utf16le, encode(sig.anchor, Encoding::utf16le)});
    }
    std::array<std::vector<const RefPattern*>, 256> by_first{};
    for (const auto& p : patterns)
        if (!p.anchor.empty()) by_first[p.anchor[0]].push_back(&p);

    std::vector<CarveHit> hits;
    for (size_t pos = 0; pos < image.size(); ++pos) {
        const auto& bucket = by_first[image[pos]];
        for (const RefPattern* pat : bucket) {
            if (!bytes_at(image, pos, pat->anchor)) continue;
            if (auto h = hit_at(image, pos, *pat)) hits.push_back(std::move(*h));
        }
    }
    std::sort(hits.begin(), hits.end(), [](const CarveHit& a, const CarveHit& b) {
        if (a.offset != b.offset) return a.offset < b.offset;
        if (a.rule_id != b.rule_id) return a.rule_id < b.rule_id;
        return a.encoding < b.encoding;
    });
    hits.erase(std::unique(hits.begin(), hits.end(),
                           [](const CarveHit& a, const CarveHit& b) {
                               return a.offset == b.offset && a.rule_id == b.rule_id;
                           }),
               hits.end());
    return hits;
}

}  // namespace onetrace::testsupport
