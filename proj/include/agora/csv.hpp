// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 Agora Contributors

#pragma once

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace agora {

/// Incremental RFC 4180 reader: quoted fields, doubled-quote escapes,
/// embedded delimiters/newlines inside quotes, LF or CRLF row endings.
class CsvReader {
public:
    explicit CsvReader(std::istream& in, char delimiter = ',')
        : in_(in), delim_(delimiter) {}

    /// Reads the next record into `row`. Returns false at end of input.
    bool next(std::vector<std::string>& row) {
        row.clear();
        int c = in_.get();
        if (c == std::istream::traits_type::eof()) return false;

        std::string field;
        bool quoted = false;
        bool any = false;
        while (true) {
            if (c == std::istream::traits_type::eof()) {
                row.push_back(std::move(field));
                return true;
            }
            char ch = static_cast<char>(c);
            if (quoted) {
                if (ch == '"') {
                    int peek = in_.peek();
                    if (peek == '"') {
                        in_.get();
                        field.push_back('"');
                    } else {
                        quoted = false;
                    }
                } else {
                    field.push_back(ch);
                }
            } else if (ch == '"' && field.empty() && !any) {
                quoted = true;
            } else if (ch == delim_) {
                row.push_back(std::move(field));
                field.clear();
                any = false;
                c = in_.get();
                continue;
            } else if (ch == '\r' && in_.peek() == '\n') {
                in_.get();
                row.push_back(std::move(field));
                return true;
            } else if (ch == '\n') {
                row.push_back(std::move(field));
                return true;
            } else {
                field.push_back(ch);
                any = true;
            }
            c = in_.get();
        }
    }

private:
    std::istream& in_;
    char delim_;
};

inline std::string csv_escape(const std::string& field, char delimiter = ',') {
    bool needs_quotes = false;
    for (char c : field) {
        if (c == '"' || c == delimiter || c == '\n' || c == '\r') {
            needs_quotes = true;
            break;
        }
    }
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += '"';
    return out;
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& row,
                          char delimiter = ',') {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out << delimiter;
        out << csv_escape(row[i], delimiter);
    }
    out << '\n';
}

} // namespace agora
