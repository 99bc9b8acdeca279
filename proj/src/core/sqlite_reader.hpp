#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "bytes.hpp"
#include "errors.hpp"

namespace onetrace {

// Decoded cell value. Integers cover serial types 1-6 and 8/9, reals type 7,
// text/blob the variable-length types.
struct SqliteValue {
    enum class Type { nul, integer, real, text, blob };
    Type type = Type::nul;
    int64_t int_v = 0;
    double real_v = 0.0;
    std::string text_v;
    std::vector<uint8_t> blob_v;

    bool is_null() const { return type == Type::nul; }
    int64_t as_int(int64_t fallback = 0) const;
    std::string as_text() const;
    // Canonical display form used when comparing against SQL dumps.
    std::string display() const;
};

struct SqliteRow {
    int64_t rowid = 0;
    std::vector<SqliteValue> values;
};

struct SqliteTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<SqliteRow> rows;
    int rowid_alias_column = -1;  // INTEGER PRIMARY KEY column, if any
};

// Read-only reader for SQLite version-3 database files: table b-trees with
// overflow pages and UTF-8 text. WAL checkpoints, freelists and deleted
// record recovery are out of scope; journal mode is only reported.
class SqliteReader {
public:
    static Result<SqliteReader> open(ByteSpan bytes);

    std::vector<std::string> table_names() const;
    bool has_table(std::string_view name) const;
    Result<SqliteTable> read_table(std::string_view name) const;
    bool wal_mode() const { return wal_mode_; }

private:
    struct SchemaEntry {
        std::string name;
        uint32_t rootpage = 0;
        std::string sql;
    };

    SqliteReader(ByteSpan bytes) : data_(bytes) {}

    Result<void> parse_header();
    Result<void> load_schema();
    Result<ByteSpan> page(uint32_t number) const;
    Result<void> walk_table(uint32_t page_no, int depth,
                            const std::function<Result<void>(int64_t, ByteSpan,
                                                             std::vector<uint8_t>&)>& cb) const;
    Result<std::vector<uint8_t>> assemble_payload(ByteSpan page_data, uint64_t cell_off,
                                                  uint64_t payload_len, uint64_t local,
                                                  std::vector<uint8_t>& scratch) const;

    ByteSpan data_;
    uint32_t page_size_ = 0;
    uint32_t usable_size_ = 0;
    uint32_t page_count_ = 0;
    bool wal_mode_ = false;
    std::vector<SchemaEntry> schema_;
};

Result<std::vector<SqliteValue>> decode_record(ByteSpan payload);
std::vector<std::string> columns_from_create_sql(std::string_view sql);
int rowid_alias_column(std::string_view sql, const std::vector<std::string>& columns);

}  // namespace onetrace
