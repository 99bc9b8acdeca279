#include "sqlite_reader.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>

namespace onetrace {

namespace {

constexpr char kMagic[16] = {'S', 'Q', 'L', 'i', 't', 'e', ' ', 'f',
                             'o', 'r', 'm', 'a', 't', ' ', '3', '\0'};

Error corrupt(uint64_t offset, const std::string& why) {
    return make_error("corrupt-page", why, offset);
}

// Variable-length big-endian integer, at most 9 bytes.
bool read_varint(ByteSpan data, uint64_t& pos, int64_t& out) {
    int64_t value = 0;
    for (int i = 0; i < 8; ++i) {
        if (pos >= data.size()) return false;
        uint8_t b = data[pos++];
        value = value << 7 | (b & 0x7f);
        if ((b & 0x80) == 0) {
            out = value;
            return true;
        }
    }
    if (pos >= data.size()) return false;
    out = value << 8 | data[pos++];
    return true;
}

int64_t read_be_signed(ByteSpan data, uint64_t pos, unsigned bytes) {
    int64_t v = (data[pos] & 0x80) ? -1 : 0;
    for (unsigned i = 0; i < bytes; ++i) v = v << 8 | data[pos + i];
    return v;
}

}  // namespace

int64_t SqliteValue::as_int(int64_t fallback) const {
    switch (type) {
        case Type::integer: return int_v;
        case Type::real: return static_cast<int64_t>(real_v);
        case Type::text: {
            try {
                return std::stoll(text_v);
            } catch (...) {
                return fallback;
            }
        }
        default: return fallback;
    }
}

std::string SqliteValue::as_text() const {
    switch (type) {
        case Type::text: return text_v;
        case Type::integer: return std::to_string(int_v);
        case Type::real: return display();
        case Type::blob: return to_hex(ByteSpan{blob_v.data(), blob_v.size()});
        case Type::nul: return {};
    }
    return {};
}

std::string SqliteValue::display() const {
    switch (type) {
        case Type::nul: return "NULL";
        case Type::integer: return std::to_string(int_v);
        case Type::real: {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", real_v);
            return buf;
        }
        case Type::text: return text_v;
        case Type::blob: return "x'" + to_hex(ByteSpan{blob_v.data(), blob_v.size()}) + "'";
    }
    return {};
}

Result<std::vector<SqliteValue>> decode_record(ByteSpan payload) {
    uint64_t pos = 0;
    int64_t header_len = 0;
    if (!read_varint(payload, pos, header_len) || header_len < 0 ||
        static_cast<uint64_t>(header_len) > payload.size())
        return corrupt(0, "record header length out of range");

    std::vector<int64_t> serials;
    while (pos < static_cast<uint64_t>(header_len)) {
        int64_t st = 0;
        if (!read_varint(payload, pos, st)) return corrupt(pos, "truncated serial type");
        serials.push_back(st);
    }

    std::vector<SqliteValue> values;
    uint64_t body = static_cast<uint64_t>(header_len);
    for (int64_t st : serials) {
        SqliteValue v;
        auto need = [&](uint64_t n) { return body + n <= payload.size(); };
        switch (st) {
            case 0: v.type = SqliteValue::Type::nul; break;
            case 1:
            case 2:
            case 3:
            case 4:
            case 5:
            case 6: {
                unsigned n = st <= 4 ? static_cast<unsigned>(st) : (st == 5 ? 6u : 8u);
                if (!need(n)) return corrupt(body, "truncated integer value");
                v.type = SqliteValue::Type::integer;
                v.int_v = read_be_signed(payload, body, n);
                body += n;
                break;
            }
            case 7: {
                if (!need(8)) return corrupt(body, "truncated float value");
                uint64_t bits = read_be64(payload.data() + body);
                double d;
                std::memcpy(&d, &bits, 8);
                v.type = SqliteValue::Type::real;
                v.real_v = d;
                body += 8;
                break;
            }
            case 8:
            case 9:
                v.type = SqliteValue::Type::integer;
                v.int_v = st - 8;
                break;
            case 10:
            case 11:
                return corrupt(body, "reserved serial type");
            default: {
                uint64_t n = static_cast<uint64_t>(st - (st % 2 == 0 ? 12 : 13)) / 2;
                if (!need(n)) return corrupt(body, "truncated payload value");
                if (st % 2 == 0) {
                    v.type = SqliteValue::Type::blob;
                    v.blob_v.assign(payload.begin() + static_cast<ptrdiff_t>(body),
                                    payload.begin() + static_cast<ptrdiff_t>(body + n));
                } else {
                    v.type = SqliteValue::Type::text;
                    v.text_v.assign(reinterpret_cast<const char*>(payload.data() + body), n);
                }
                body += n;
                break;
            }
        }
        values.push_back(std::move(v));
    }
    return values;
}

std::vector<std::string> columns_from_create_sql(std::string_view sql) {
    std::vector<std::string> cols;
    size_t open = sql.find('(');
    size_t close = sql.rfind(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close <= open)
        return cols;
    std::string_view body = sql.substr(open + 1, close - open - 1);

    static const char* kConstraints[] = {"PRIMARY", "UNIQUE", "CHECK", "FOREIGN", "CONSTRAINT"};
    int depth = 0;
    size_t start = 0;
    auto flush = [&](size_t end) {
        std::string_view item = trim_view(body.substr(start, end - start));
        if (item.empty()) return;
        size_t name_end = 0;
        char quote = 0;
        if (item[0] == '"' || item[0] == '`' || item[0] == '[' || item[0] == '\'') {
            quote = item[0] == '[' ? ']' : item[0];
            size_t q = item.find(quote, 1);
            if (q == std::string_view::npos) return;
            std::string name(item.substr(1, q - 1));
            cols.push_back(std::move(name));
            return;
        }
        while (name_end < item.size() && item[name_end] != ' ' && item[name_end] != '\t' &&
               item[name_end] != '\n' && item[name_end] != '\r' && item[name_end] != '(')
            ++name_end;
        std::string name(item.substr(0, name_end));
        for (const char* c : kConstraints)
            if (iequals(name, c)) return;
        cols.push_back(std::move(name));
    };
    for (size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            flush(i);
            start = i + 1;
        }
    }
    flush(body.size());
    return cols;
}

int rowid_alias_column(std::string_view sql, const std::vector<std::string>& columns) {
    size_t open = sql.find('(');
    size_t close = sql.rfind(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close <= open)
        return -1;
    std::string_view body = sql.substr(open + 1, close - open - 1);
    int depth = 0;
    size_t start = 0;
    size_t col_idx = 0;
    for (size_t i = 0; i <= body.size(); ++i) {
        if (i < body.size()) {
            char c = body[i];
            if (c == '(') ++depth;
            if (c == ')') --depth;
            if (c != ',' || depth != 0) continue;
        }
        std::string_view item = trim_view(body.substr(start, i - start));
        start = i + 1;
        if (item.empty()) continue;
        if (col_idx >= columns.size()) break;
        if (icontains(item, "INTEGER") && icontains(item, "PRIMARY") && icontains(item, "KEY"))
            return static_cast<int>(col_idx);
        ++col_idx;
    }
    return -1;
}

Result<SqliteReader> SqliteReader::open(ByteSpan bytes) {
    SqliteReader r(bytes);
    if (auto h = r.parse_header(); !h) return h.error();
    if (auto s = r.load_schema(); !s) return s.error();
    return r;
}

Result<void> SqliteReader::parse_header() {
    if (data_.size() < 100 || std::memcmp(data_.data(), kMagic, 16) != 0)
        return make_error("not-sqlite", "missing SQLite version-3 magic header");
    uint32_t ps = read_be16(data_.data() + 16);
    page_size_ = ps == 1 ? 65536 : ps;
    if (page_size_ < 512 || (page_size_ & (page_size_ - 1)) != 0)
        return corrupt(16, "invalid page size");
    uint8_t reserved = data_[20];
    usable_size_ = page_size_ - reserved;
    if (usable_size_ < 480) return corrupt(20, "reserved space too large");
    wal_mode_ = data_[18] == 2 || data_[19] == 2;
    uint32_t encoding = read_be32(data_.data() + 56);
    if (encoding > 1)
        return make_error("unsupported-encoding",
                          "only UTF-8 databases are supported (encoding " +
                              std::to_string(encoding) + ")");
    page_count_ = static_cast<uint32_t>(data_.size() / page_size_);
    if (page_count_ == 0) return corrupt(0, "file smaller than one page");
    return {};
}

Result<ByteSpan> SqliteReader::page(uint32_t number) const {
    if (number == 0 || number > page_count_)
        return corrupt(static_cast<uint64_t>(number) * page_size_,
                       "page " + std::to_string(number) + " out of range");
    uint64_t off = static_cast<uint64_t>(number - 1) * page_size_;
    if (off + page_size_ > data_.size())
        return corrupt(off, "page " + std::to_string(number) + " truncated");
    return ByteSpan{data_.data() + off, page_size_};
}

Result<std::vector<uint8_t>> SqliteReader::assemble_payload(ByteSpan page_data,
                                                            uint64_t cell_off,
                                                            uint64_t payload_len,
                                                            uint64_t local,
                                                            std::vector<uint8_t>& scratch) const {
    scratch.clear();
    if (cell_off + local + 4 > page_data.size())
        return corrupt(cell_off, "cell payload overruns page");
    scratch.insert(scratch.end(), page_data.begin() + static_cast<ptrdiff_t>(cell_off),
                   page_data.begin() + static_cast<ptrdiff_t>(cell_off + local));
    uint32_t next = read_be32(page_data.data() + cell_off + local);
    uint64_t remaining = payload_len - local;
    while (remaining > 0) {
        if (next == 0) return corrupt(0, "overflow chain ended early");
        auto pg = page(next);
        if (!pg) return pg.error();
        uint64_t take = std::min<uint64_t>(remaining, usable_size_ - 4);
        scratch.insert(scratch.end(), pg->begin() + 4,
                       pg->begin() + 4 + static_cast<ptrdiff_t>(take));
        remaining -= take;
        next = read_be32(pg->data());
    }
    return scratch;
}

Result<void> SqliteReader::walk_table(
    uint32_t page_no, int depth,
    const std::function<Result<void>(int64_t, ByteSpan, std::vector<uint8_t>&)>& cb) const {
    if (depth > 64) return corrupt(0, "b-tree deeper than supported");
    auto pg = page(page_no);
    if (!pg) return pg.error();
    ByteSpan p = *pg;
    uint64_t hdr = page_no == 1 ? 100 : 0;
    if (hdr + 8 > p.size()) return corrupt(hdr, "page header truncated");
    uint8_t type = p[hdr];
    uint16_t cell_count = read_be16(p.data() + hdr + 3);

    if (type == 5) {  // interior table page
        if (hdr + 12 > p.size()) return corrupt(hdr, "interior header truncated");
        uint64_t ptr_array = hdr + 12;
        for (uint16_t i = 0; i < cell_count; ++i) {
            if (ptr_array + 2 * i + 2 > p.size()) return corrupt(ptr_array, "cell pointer overrun");
            uint16_t off = read_be16(p.data() + ptr_array + 2 * i);
            if (off + 4u > p.size()) return corrupt(off, "interior cell overrun");
            uint32_t child = read_be32(p.data() + off);
            if (auto r = walk_table(child, depth + 1, cb); !r) return r;
        }
        uint32_t right = read_be32(p.data() + hdr + 8);
        return walk_table(right, depth + 1, cb);
    }
    if (type != 13)
        return corrupt(hdr, "page " + std::to_string(page_no) + " is not a table b-tree page");

    uint64_t ptr_array = hdr + 8;
    std::vector<uint8_t> scratch;
    for (uint16_t i = 0; i < cell_count; ++i) {
        if (ptr_array + 2 * i + 2 > p.size()) return corrupt(ptr_array, "cell pointer overrun");
        uint64_t off = read_be16(p.data() + ptr_array + 2 * i);
        uint64_t pos = off;
        int64_t payload_len = 0, rowid = 0;
        if (!read_varint(p, pos, payload_len) || !read_varint(p, pos, rowid))
            return corrupt(off, "truncated cell header");
        if (payload_len < 0) return corrupt(off, "negative payload length");

        uint64_t u = usable_size_;
        uint64_t x = u - 35;
        if (static_cast<uint64_t>(payload_len) <= x) {
            if (pos + static_cast<uint64_t>(payload_len) > p.size())
                return corrupt(pos, "local payload overruns page");
            auto r = cb(rowid, p.subspan(pos, static_cast<uint64_t>(payload_len)), scratch);
            if (!r) return r;
        } else {
            uint64_t m = (u - 12) * 32 / 255 - 23;
            uint64_t k = m + (static_cast<uint64_t>(payload_len) - m) % (u - 4);
            uint64_t local = k <= x ? k : m;
            auto full = assemble_payload(p, pos, static_cast<uint64_t>(payload_len), local,
                                         scratch);
            if (!full) return full.error();
            auto r = cb(rowid, ByteSpan{full->data(), full->size()}, scratch);
            if (!r) return r;
        }
    }
    return {};
}

Result<void> SqliteReader::load_schema() {
    auto cb = [this](int64_t, ByteSpan payload, std::vector<uint8_t>&) -> Result<void> {
        auto values = decode_record(payload);
        if (!values) return values.error();
        // sqlite_schema: type, name, tbl_name, rootpage, sql
        if (values->size() < 5) return {};
        if ((*values)[0].as_text() != "table") return {};
        SchemaEntry e;
        e.name = (*values)[1].as_text();
        e.rootpage = static_cast<uint32_t>((*values)[3].as_int());
        e.sql = (*values)[4].as_text();
        schema_.push_back(std::move(e));
        return {};
    };
    return walk_table(1, 0, cb);
}

std::vector<std::string> SqliteReader::table_names() const {
    std::vector<std::string> names;
    for (const auto& e : schema_) names.push_back(e.name);
    return names;
}

bool SqliteReader::has_table(std::string_view name) const {
    for (const auto& e : schema_)
        if (e.name == name) return true;
    return false;
}

Result<SqliteTable> SqliteReader::read_table(std::string_view name) const {
    const SchemaEntry* entry = nullptr;
    for (const auto& e : schema_)
        if (e.name == name) entry = &e;
    if (entry == nullptr)
        return make_error("table-not-found", "no table named '" + std::string(name) + "'");

    SqliteTable table;
    table.name = entry->name;
    table.columns = columns_from_create_sql(entry->sql);
    table.rowid_alias_column = rowid_alias_column(entry->sql, table.columns);

    auto cb = [&](int64_t rowid, ByteSpan payload, std::vector<uint8_t>&) -> Result<void> {
        auto values = decode_record(payload);
        if (!values) return values.error();
        SqliteRow row;
        row.rowid = rowid;
        row.values = std::move(*values);
        // An INTEGER PRIMARY KEY column stores NULL; the rowid is the value.
        if (table.rowid_alias_column >= 0 &&
            static_cast<size_t>(table.rowid_alias_column) < row.values.size() &&
            row.values[table.rowid_alias_column].is_null()) {
            row.values[table.rowid_alias_column].type = SqliteValue::Type::integer;
            row.values[table.rowid_alias_column].int_v = rowid;
        }
        table.rows.push_back(std::move(row));
        return {};
    };
    if (auto r = walk_table(entry->rootpage, 0, cb); !r) return r.error();
    return table;
}

}  // namespace onetrace
