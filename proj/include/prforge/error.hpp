#pragma once

#include <stdexcept>
#include <string>

namespace prforge {

// Every failure surfaced by the library carries a stable, machine-readable
// code (used as the reject reason in stage reports) plus a human message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message)
        , m_code(std::move(code))
    {
    }

    const std::string& code() const noexcept { return m_code; }

private:
    std::string m_code;
};

class IngestError : public Error {
public:
    using Error::Error;
};

class DiffError : public Error {
public:
    using Error::Error;
};

class RenderError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message)
        : Error("config_invalid", message)
    {
    }
};

} // namespace prforge
