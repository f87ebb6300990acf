// Bit-stable CSV emission and content hashing for run manifests.
#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace hbcd {

// 17 significant digits: round-trip exact for IEEE doubles.
std::string format_double(double v);

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    void row(const std::vector<std::string>& cells);
    const std::string& path() const { return path_; }

    static std::string cell(double v) { return format_double(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(long v) { return std::to_string(v); }
    static std::string cell(const std::string& s) { return s; }

private:
    std::string path_;
    std::ofstream out_;
    std::size_t columns_;
};

// FNV-1a 64-bit content hash, hex encoded.
std::string fnv1a_hex(const std::string& bytes);
std::string file_digest(const std::string& path);

}  // namespace hbcd
