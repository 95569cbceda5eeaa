#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace errql::csv {

// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
// embedded newlines. Returns one vector of fields per record; a trailing
// newline does not produce an empty record. CRLF and LF both accepted.
std::vector<std::vector<std::string>> read(std::istream& in);
std::vector<std::vector<std::string>> read_file(const std::string& path);

// Quotes a field only when needed (comma, quote, CR or LF present).
std::string escape(const std::string& field);

// Writes one record, always terminated with '\n'.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace errql::csv
