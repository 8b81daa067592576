#include "agd/workbench.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

namespace agd {

namespace {

std::string escape(const std::string& v) {
    std::string out;
    for (char c : v) {
        if (c == '\\') {
            out += "\\\\";
        } else if (c == '\n') {
            out += "\\n";
        } else {
            out += c;
        }
    }
    return out;
}

std::string unescape(const std::string& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] == '\\' && i + 1 < v.size()) {
            ++i;
            out += v[i] == 'n' ? '\n' : v[i];
        } else {
            out += v[i];
        }
    }
    return out;
}

}  // namespace

void RunReport::set(const std::string& key, const std::string& value) {
    if (key.empty() || key.find('=') != std::string::npos || key.find('\n') != std::string::npos)
        throw std::invalid_argument("RunReport: invalid key '" + key + "'");
    for (auto& [k, v] : entries_)
        if (k == key) {
            v = value;
            return;
        }
    entries_.emplace_back(key, value);
}

void RunReport::set(const std::string& key, double value) { set(key, format_number(value)); }

void RunReport::set_int(const std::string& key, long long value) { set(key, std::to_string(value)); }

void RunReport::set(const std::string& key, const std::vector<double>& values) {
    std::string joined;
    for (std::size_t i = 0; i < values.size(); ++i) joined += (i ? " " : "") + format_number(values[i]);
    set(key, joined);
}

std::optional<std::string> RunReport::get(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return v;
    return std::nullopt;
}

void RunReport::write_record(std::ostream& out) const {
    for (const auto& [k, v] : entries_) out << k << '=' << escape(v) << '\n';
}

RunReport RunReport::read_record(std::istream& in) {
    RunReport r;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("RunReport: malformed line '" + line + "'");
        r.set(line.substr(0, eq), unescape(line.substr(eq + 1)));
    }
    return r;
}

void RunReport::write_table(std::ostream& out) const {
    std::size_t width = 0;
    for (const auto& [k, v] : entries_)
        if (v.find('\n') == std::string::npos) width = std::max(width, k.size());
    for (const auto& [k, v] : entries_) {
        if (v.find('\n') != std::string::npos) continue;
        out << k << std::string(width - k.size() + 2, ' ') << v << '\n';
    }
}

}  // namespace agd
