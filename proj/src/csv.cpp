#include "csv.hpp"

#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace hycard {

namespace {

// Splits one logical CSV record starting at `pos`. Returns the fields and
// leaves `pos` at the start of the next record. Quotes per RFC 4180.
std::vector<std::string> parse_record(const std::string& text, size_t& pos, char delim) {
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    while (pos < text.size()) {
        char c = text[pos];
        if (in_quotes) {
            if (c == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    cur.push_back('"');
                    pos += 2;
                } else {
                    in_quotes = false;
                    ++pos;
                }
            } else {
                cur.push_back(c);
                ++pos;
            }
        } else if (c == '"') {
            in_quotes = true;
            ++pos;
        } else if (c == delim) {
            fields.push_back(std::move(cur));
            cur.clear();
            ++pos;
        } else if (c == '\n') {
            ++pos;
            break;
        } else if (c == '\r') {
            ++pos;
            if (pos < text.size() && text[pos] == '\n') ++pos;
            break;
        } else {
            cur.push_back(c);
            ++pos;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

char detect_delimiter(const std::string& text) {
    size_t commas = 0, semis = 0;
    bool in_quotes = false;
    for (char c : text) {
        if (c == '"') in_quotes = !in_quotes;
        if (in_quotes) continue;
        if (c == '\n' || c == '\r') break;
        if (c == ',') ++commas;
        if (c == ';') ++semis;
    }
    return semis > commas ? ';' : ',';
}

}  // namespace

CsvDoc csv_parse(const std::string& text_in, const std::string& origin) {
    std::string text = text_in;
    // UTF-8 BOM
    if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
        static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF) {
        text.erase(0, 3);
    }
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw DataError(origin + ": empty file");
    }

    CsvDoc doc;
    doc.delimiter = detect_delimiter(text);
    size_t pos = 0;
    doc.header = parse_record(text, pos, doc.delimiter);

    size_t data_row = 0;
    while (pos < text.size()) {
        // A trailing newline leaves one empty record behind; skip blank lines.
        size_t probe = pos;
        while (probe < text.size() && (text[probe] == '\r' || text[probe] == '\n')) ++probe;
        if (probe >= text.size()) break;
        pos = probe;

        auto fields = parse_record(text, pos, doc.delimiter);
        ++data_row;
        if (fields.size() != doc.header.size()) {
            std::ostringstream os;
            os << origin << ": row " << data_row << ": expected " << doc.header.size()
               << " fields, got " << fields.size();
            throw DataError(os.str());
        }
        doc.rows.push_back(std::move(fields));
    }
    return doc;
}

CsvDoc csv_read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return csv_parse(buf.str(), path);
}

std::string csv_escape(const std::string& field, char delimiter) {
    bool needs_quotes = field.find_first_of("\"\r\n") != std::string::npos ||
                        field.find(delimiter) != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void csv_write_file(const std::string& path,
                    const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + path);
    auto write_row = [&](const std::vector<std::string>& fields) {
        for (size_t i = 0; i < fields.size(); ++i) {
            if (i) out << ',';
            out << csv_escape(fields[i]);
        }
        out << '\n';
    };
    write_row(header);
    for (const auto& row : rows) write_row(row);
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace hycard
