#pragma once

#include <string>
#include <vector>

namespace hycard {

// String-level CSV document. Typed parsing happens in table.cpp.
struct CsvDoc {
    char delimiter = ',';
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// RFC-4180-style reader: quoted fields, embedded quotes/delimiters/newlines,
// CRLF tolerated, UTF-8 BOM stripped. Delimiter (comma or semicolon) is
// auto-detected from the header line. Throws DataError on empty files or
// ragged rows (message names the data row).
CsvDoc csv_read_file(const std::string& path);
CsvDoc csv_parse(const std::string& text, const std::string& origin);

// Always writes comma-delimited output with a header row.
void csv_write_file(const std::string& path,
                    const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows);

std::string csv_escape(const std::string& field, char delimiter = ',');

}  // namespace hycard
