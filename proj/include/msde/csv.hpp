#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace msde {

/// Serialize a double with 17 significant digits, enough for bit-exact
/// round-tripping through decimal text.
std::string format_value(double v);

/// Minimal CSV writer with the fixed numeric format used by every emitter.
class CsvWriter {
public:
    explicit CsvWriter(std::string path);
    void header(const std::vector<std::string>& names);
    void row(const std::vector<double>& values);
    void row_with_id(long id, const std::vector<double>& values);
    /// Flush to disk; returns the written byte count.
    std::size_t close();
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::string buffer_;
    bool closed_ = false;
};

/// Parse a CSV produced by CsvWriter (numeric cells only past the header).
std::vector<std::vector<double>> read_csv(const std::string& path, int skip_header_rows = 1);

/// FNV-1a hash of a file's bytes (used by run manifests).
std::uint64_t hash_file(const std::string& path);

}  // namespace msde
