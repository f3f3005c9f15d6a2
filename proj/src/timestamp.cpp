#include "prforge/timestamp.hpp"

#include "prforge/error.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>

namespace prforge {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date (Hinnant's algorithm).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d)
{
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d)
{
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

class Cursor {
public:
    explicit Cursor(std::string_view text)
        : m_text(text)
    {
    }

    int digits(std::size_t count)
    {
        int value = 0;
        for (std::size_t i = 0; i < count; ++i) {
            if (m_pos >= m_text.size() || !std::isdigit(static_cast<unsigned char>(m_text[m_pos])))
                fail();
            value = value * 10 + (m_text[m_pos++] - '0');
        }
        return value;
    }

    void expect(char c)
    {
        if (m_pos >= m_text.size() || m_text[m_pos] != c)
            fail();
        ++m_pos;
    }

    bool accept(char c)
    {
        if (m_pos < m_text.size() && m_text[m_pos] == c) {
            ++m_pos;
            return true;
        }
        return false;
    }

    bool at_end() const { return m_pos == m_text.size(); }

    bool digit_ahead() const
    {
        return m_pos < m_text.size() && std::isdigit(static_cast<unsigned char>(m_text[m_pos]));
    }

    [[noreturn]] void fail() const
    {
        throw Error("bad_timestamp", "invalid ISO-8601 timestamp: '" + std::string(m_text) + "'");
    }

private:
    std::string_view m_text;
    std::size_t m_pos = 0;
};

} // namespace

Timestamp parse_timestamp(std::string_view text)
{
    Cursor cur(text);
    const int year = cur.digits(4);
    cur.expect('-');
    const int month = cur.digits(2);
    cur.expect('-');
    const int day = cur.digits(2);
    if (!cur.accept('T') && !cur.accept(' '))
        cur.fail();
    const int hour = cur.digits(2);
    cur.expect(':');
    const int minute = cur.digits(2);
    cur.expect(':');
    const int second = cur.digits(2);
    const std::chrono::year_month_day ymd { std::chrono::year(year), std::chrono::month(static_cast<unsigned>(month)),
        std::chrono::day(static_cast<unsigned>(day)) };
    if (!ymd.ok() || hour > 23 || minute > 59 || second > 60)
        cur.fail();

    // Fractional seconds are truncated.
    if (cur.accept('.')) {
        cur.digits(1);
        while (cur.digit_ahead())
            cur.digits(1);
    }

    std::int64_t offset = 0;
    if (cur.accept('Z') || cur.at_end()) {
    } else {
        int sign = 0;
        if (cur.accept('+'))
            sign = 1;
        else if (cur.accept('-'))
            sign = -1;
        else
            cur.fail();
        const int oh = cur.digits(2);
        cur.accept(':');
        const int om = cur.digits(2);
        offset = sign * (oh * 3600 + om * 60);
    }
    if (!cur.at_end())
        cur.fail();

    const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
    return Timestamp { days * 86400 + hour * 3600 + minute * 60 + second - offset };
}

std::string format_timestamp(Timestamp ts)
{
    std::int64_t days = ts.seconds / 86400;
    std::int64_t rem = ts.seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    std::int64_t y = 0;
    unsigned m = 0;
    unsigned d = 0;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<long long>(y), m, d,
        static_cast<long long>(rem / 3600), static_cast<long long>(rem / 60 % 60), static_cast<long long>(rem % 60));
    return buf;
}

} // namespace prforge
