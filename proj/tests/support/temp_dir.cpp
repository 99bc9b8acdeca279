#include "temp_dir.hpp"

#include <atomic>
#include <fstream>
#include <random>

namespace onetrace::testsupport {

namespace fs = std::filesystem;

TempDir::TempDir() {
    static std::atomic<uint64_t> counter{0};
    std::random_device rd;
    uint64_t tag = (static_cast<uint64_t>(rd()) << 20) ^ counter.fetch_add(1);
    path_ = fs::temp_directory_path() / ("onetrace-test-" + std::to_string(tag));
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

fs::path TempDir::write(const std::string& relative, ByteSpan bytes) const {
    fs::path target = path_ / relative;
    fs::create_directories(target.parent_path());
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    return target;
}

fs::path TempDir::write(const std::string& relative, const std::string& text) const {
    return write(relative, as_bytes(text));
}

fs::path TempDir::mkdirs(const std::string& relative) const {
    fs::path target = path_ / relative;
    fs::create_directories(target);
    return target;
}

std::string read_file_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::vector<uint8_t> read_file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
}

}  // namespace onetrace::testsupport
