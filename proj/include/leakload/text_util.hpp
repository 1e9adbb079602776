#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "leakload/error.hpp"

namespace leakload::text {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::string upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) {
            if (start < text.size()) lines.push_back(text.substr(start));
            break;
        }
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = end + 1;
    }
    return lines;
}

/// Shortest representation that parses back to the same double.
inline std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, ptr);
}

inline bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::system_error(errno ? errno : ENOENT, std::generic_category(),
                                     "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes to a sibling temp file and renames it over the target.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::system_error(errno ? errno : EACCES, std::generic_category(),
                                          "cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::system_error(EIO, std::generic_category(),
                                          "short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

/// One `key = value` entry of a sectioned key/value file.
struct KeyValue {
    std::string section;  // lower-cased, empty before the first [header]
    std::string key;
    std::string value;
    int line = 0;
    int section_line = 0;  // line of the enclosing [header], 0 before the first
};

/// Parses the line-oriented key=value format shared by parameter files,
/// variation specs, library overrides and the corpus manifest.
/// `#` starts a comment, `[name]` opens a section.
inline std::vector<KeyValue> parse_key_values(std::string_view text) {
    std::vector<KeyValue> entries;
    std::string section;
    int section_line = 0;
    int line_no = 0;
    for (auto raw : split_lines(text)) {
        ++line_no;
        auto hash = raw.find('#');
        auto line = trim(hash == std::string_view::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
            auto name = trim(line.substr(1, line.size() - 2));
            section.clear();
            for (char c : name) section.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            section_line = line_no;
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
        auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ParseError(line_no, "empty key");
        entries.push_back({section, std::string(key), std::string(trim(line.substr(eq + 1))), line_no, section_line});
    }
    return entries;
}

inline double value_as_double(const KeyValue& kv) {
    double v = 0.0;
    if (!parse_double(kv.value, v)) throw ParseError(kv.line, "'" + kv.key + "' is not a number: " + kv.value);
    return v;
}

}  // namespace leakload::text
