#include "prforge/sample.hpp"

#include "prforge/error.hpp"

namespace prforge {

using nlohmann::json;

const char* to_string(SampleFormat format)
{
    switch (format) {
    case SampleFormat::general:
        return "general";
    case SampleFormat::python:
        return "python";
    case SampleFormat::trajectory:
        return "trajectory";
    }
    return "general";
}

const char* to_string(SampleSubset subset)
{
    switch (subset) {
    case SampleSubset::ctx_gen:
        return "ctx_gen";
    case SampleSubset::ctx_py:
        return "ctx_py";
    case SampleSubset::env_pass:
        return "env_pass";
    case SampleSubset::env_fail:
        return "env_fail";
    }
    return "ctx_gen";
}

SampleFormat parse_sample_format(const std::string& text)
{
    if (text == "general")
        return SampleFormat::general;
    if (text == "python")
        return SampleFormat::python;
    if (text == "trajectory")
        return SampleFormat::trajectory;
    throw Error("malformed", "unknown sample format '" + text + "'");
}

SampleSubset parse_sample_subset(const std::string& text)
{
    if (text == "ctx_gen")
        return SampleSubset::ctx_gen;
    if (text == "ctx_py")
        return SampleSubset::ctx_py;
    if (text == "env_pass")
        return SampleSubset::env_pass;
    if (text == "env_fail")
        return SampleSubset::env_fail;
    throw Error("unknown_subset", "unknown subset '" + text + "'");
}

json to_json(const RenderedSample& s)
{
    return json {
        { "id", s.id },
        { "format", to_string(s.format) },
        { "subset", to_string(s.subset) },
        { "text", s.text },
        { "token_count", s.token_count },
        { "enhanced", s.enhanced },
        { "source_repo", s.source_repo },
    };
}

RenderedSample sample_from_json(const json& j)
{
    RenderedSample s;
    s.id = j.at("id").get<std::string>();
    s.format = parse_sample_format(j.at("format").get<std::string>());
    s.subset = parse_sample_subset(j.at("subset").get<std::string>());
    s.text = j.at("text").get<std::string>();
    s.token_count = j.at("token_count").get<std::size_t>();
    s.enhanced = j.value("enhanced", false);
    s.source_repo = j.value("source_repo", std::string());
    return s;
}

std::string dump_line(const json& j)
{
    return j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
}

JsonLinesReader::JsonLinesReader(const std::filesystem::path& path)
    : m_in(path, std::ios::binary)
    , m_path(path)
{
    if (!m_in)
        throw Error("io", "cannot open " + path.string());
}

std::optional<json> JsonLinesReader::next()
{
    std::string line;
    while (std::getline(m_in, line)) {
        ++m_line_no;
        if (line.empty())
            continue;
        try {
            return json::parse(line);
        } catch (const json::exception& e) {
            throw Error("malformed", m_path.string() + ":" + std::to_string(m_line_no) + ": " + e.what());
        }
    }
    return std::nullopt;
}

JsonLinesWriter::JsonLinesWriter(const std::filesystem::path& path, bool append)
    : m_out(path, append ? std::ios::binary | std::ios::app : std::ios::binary | std::ios::trunc)
{
    if (!m_out)
        throw Error("io", "cannot write " + path.string());
}

void JsonLinesWriter::write(const json& j)
{
    m_out << dump_line(j);
    if (!m_out)
        throw Error("io", "write failed");
    ++m_written;
}

} // namespace prforge
