#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "catalog.hpp"
#include "errors.hpp"
#include "report.hpp"

namespace onetrace {

enum class Encoding { ascii, utf16le };
std::string_view to_string(Encoding e);

enum class OperationTag { none, upload, download_open, del, sync, login };
std::string_view to_string(OperationTag t);
std::optional<OperationTag> operation_tag_from(std::string_view s);

enum class CaptureTransform { none, percent_decode, strip_crlf, trim, email_token };

// Where and how to lift a value out of the bytes around an anchor match.
// `marker` locates the value start; for `before` captures the marker is
// searched backwards from the anchor and the value read forward from it.
struct CaptureSpec {
    std::string name;
    bool before = false;
    std::string marker;
    std::vector<uint8_t> terminators;
    uint32_t max_len = 64;
    uint32_t window = 0;
    bool required = true;
    CaptureTransform transform = CaptureTransform::none;
    std::string confirm;
    uint32_t confirm_window = 0;
};

struct Signature {
    std::string rule_id;
    Category category = Category::file_activity;
    Platform platform = Platform::any;
    Confidence confidence = Confidence::high;
    std::string anchor;
    OperationTag operation = OperationTag::none;
    bool scan_ascii = true;
    bool scan_utf16le = true;
    std::string requires_before;
    uint32_t requires_before_window = 0;
    std::vector<CaptureSpec> captures;
};

Result<void> validate_signature(const Signature& s);
Result<std::vector<Signature>> signatures_from_catalog(const Catalog& catalog);
const std::vector<Signature>& builtin_signatures();

struct CarveHit {
    std::string rule_id;
    uint64_t offset = 0;  // anchor start, absolute image offset
    Encoding encoding = Encoding::ascii;
    uint64_t span_length = 0;  // bytes from anchor start through the last capture read
    std::vector<std::pair<std::string, std::string>> captures;

    const std::string* capture(std::string_view name) const;
};

// Random-access byte source; implementations must be safe for concurrent
// reads from worker threads.
class ByteSource {
public:
    virtual ~ByteSource() = default;
    virtual uint64_t size() const = 0;
    virtual Result<void> read(uint64_t offset, uint8_t* out, uint64_t len) const = 0;
    // Zero-copy view when the bytes are already resident; nullptr otherwise.
    virtual const uint8_t* view(uint64_t offset, uint64_t len) const {
        (void)offset;
        (void)len;
        return nullptr;
    }
};

class MemorySource final : public ByteSource {
public:
    explicit MemorySource(ByteSpan data) : data_(data) {}
    uint64_t size() const override { return data_.size(); }
    Result<void> read(uint64_t offset, uint8_t* out, uint64_t len) const override;
    const uint8_t* view(uint64_t offset, uint64_t len) const override;

private:
    ByteSpan data_;
};

class FileSource final : public ByteSource {
public:
    static Result<FileSource> open(const std::filesystem::path& path);
    uint64_t size() const override { return size_; }
    Result<void> read(uint64_t offset, uint8_t* out, uint64_t len) const override;

private:
    FileSource(std::filesystem::path path, uint64_t size)
        : path_(std::move(path)), size_(size) {}
    std::filesystem::path path_;
    uint64_t size_ = 0;
};

struct CarveParams {
    uint64_t chunk_size = 8ull << 20;
    uint64_t overlap = 64ull << 10;
    int jobs = 1;
};

// Chunked, optionally parallel scan. Output is sorted by (offset, rule_id),
// deduplicated on (rule_id, offset), and equal to a single-pass scan of the
// whole image regardless of chunking and worker count.
Result<std::vector<CarveHit>> carve(const ByteSource& image,
                                    const std::vector<Signature>& signatures,
                                    const CarveParams& params);

std::vector<Finding> hits_to_findings(const std::vector<CarveHit>& hits,
                                      const EvidenceSource& image_source,
                                      const Catalog& catalog);

// Encoding helpers shared with the tests' reference scanner.
std::vector<uint8_t> encode_literal(std::string_view lit, Encoding enc);
std::string apply_capture_transform(CaptureTransform t, std::string_view raw);
std::optional<CaptureTransform> capture_transform_from(std::string_view s);

}  // namespace onetrace
