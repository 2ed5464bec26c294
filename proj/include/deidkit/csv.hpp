#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace deidkit {

/// Quotes a field when it contains a comma, quote, CR or LF; quotes are doubled.
std::string csv_escape(std::string_view field);
std::string csv_row(const std::vector<std::string>& fields);

/// RFC 4180 reader: quoted fields may span lines. Accepts LF or CRLF row endings.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace deidkit
