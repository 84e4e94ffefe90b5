// Copyright (c) 2026 the qpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "qpp/errors.hpp"

namespace qpp {

// Shortest round-trip decimal representation of a double.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

// Fixed significant-digit representation, used for cache keys.
inline std::string format_double_sig(double v, int digits) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*e", digits - 1, v);
    return buf;
}

// Minimal RFC-4180 writer: CRLF records, quoting only when a field needs it.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw ConfigError("cannot open '" + path + "' for writing");
        path_ = path;
    }

    void field(std::string_view s) {
        sep();
        if (s.find_first_of(",\"\r\n") != std::string_view::npos) {
            out_ << '"';
            for (char c : s) {
                if (c == '"') out_ << '"';
                out_ << c;
            }
            out_ << '"';
        } else {
            out_ << s;
        }
    }
    void field(double v) { sep(); out_ << format_double(v); }
    void field(int v) { sep(); out_ << v; }
    void field(long long v) { sep(); out_ << v; }
    void empty_field() { sep(); }

    void end_row() {
        out_ << "\r\n";
        row_open_ = false;
    }

    template <class... Ts>
    void row(Ts&&... cells) {
        (field(std::forward<Ts>(cells)), ...);
        end_row();
    }

    void header(std::initializer_list<std::string_view> names) {
        for (auto n : names) field(n);
        end_row();
    }

    void close() {
        out_.close();
        if (!out_) throw ConfigError("write failure on '" + path_ + "'");
    }

private:
    void sep() {
        if (row_open_) out_ << ',';
        row_open_ = true;
    }
    std::ofstream out_;
    std::string path_;
    bool row_open_ = false;
};

} // namespace qpp
