#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

namespace prforge {

enum class SampleFormat { general, python, trajectory };
enum class SampleSubset { ctx_gen, ctx_py, env_pass, env_fail };

const char* to_string(SampleFormat format);
const char* to_string(SampleSubset subset);
SampleFormat parse_sample_format(const std::string& text);
SampleSubset parse_sample_subset(const std::string& text);

/// One training sample. `enhanced` is provenance only; it never appears in `text`.
struct RenderedSample {
    std::string id;
    SampleFormat format = SampleFormat::general;
    std::string text;
    std::size_t token_count = 0;
    SampleSubset subset = SampleSubset::ctx_gen;
    std::string source_repo;
    bool enhanced = false;

    bool operator==(const RenderedSample&) const = default;
};

nlohmann::json to_json(const RenderedSample& s);
RenderedSample sample_from_json(const nlohmann::json& j);

/// Line-delimited JSON reader that hands out one parsed object per line.
class JsonLinesReader {
public:
    explicit JsonLinesReader(const std::filesystem::path& path);

    /// nullopt at end of file. Throws prforge::Error("malformed") naming the line.
    std::optional<nlohmann::json> next();
    std::size_t line_no() const { return m_line_no; }

private:
    std::ifstream m_in;
    std::filesystem::path m_path;
    std::size_t m_line_no = 0;
};

class JsonLinesWriter {
public:
    explicit JsonLinesWriter(const std::filesystem::path& path, bool append = false);

    void write(const nlohmann::json& j);
    std::size_t written() const { return m_written; }

private:
    std::ofstream m_out;
    std::size_t m_written = 0;
};

/// Compact, key-sorted, one line.
std::string dump_line(const nlohmann::json& j);

} // namespace prforge
