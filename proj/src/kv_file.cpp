// SPDX-License-Identifier: Apache-2.0
#include "spk/kv_file.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>

#include "spk/error.hpp"

namespace spk {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

KvFile KvFile::parse(std::istream& in, std::string_view source) {
    KvFile kv;
    kv.source_ = source;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = line;
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        const std::string where = std::string(source) + ":" + std::to_string(lineno);
        if (eq == std::string_view::npos) throw ConfigError(where + ": expected key=value, got '" + std::string(s) + "'");
        const std::string key(trim(s.substr(0, eq)));
        if (key.empty()) throw ConfigError(where + ": empty key");
        if (kv.values_.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
        kv.values_[key] = std::string(trim(s.substr(eq + 1)));
    }
    return kv;
}

KvFile KvFile::read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse(in, path.string());
}

const std::string& KvFile::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(source_ + ": missing key '" + key + "'");
    return it->second;
}

std::string KvFile::get_or(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double KvFile::get_double(const std::string& key, double fallback) const {
    return has(key) ? parse_double(get(key), key) : fallback;
}

long long KvFile::get_int(const std::string& key, long long fallback) const {
    return has(key) ? parse_int(get(key), key) : fallback;
}

std::vector<std::string> KvFile::get_list(const std::string& key) const { return split_list(get(key)); }

void KvFile::require_known(const std::set<std::string>& known) const {
    for (const auto& [k, v] : values_) {
        if (!known.count(k)) throw ConfigError(source_ + ": unknown key '" + k + "'");
    }
}

void KvFile::write(std::ostream& out) const {
    for (const auto& [k, v] : values_) out << k << '=' << v << '\n';
}

std::vector<std::string> split_list(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        const auto item = trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (!item.empty()) out.emplace_back(item);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_double(std::string_view text, std::string_view what) {
    const std::string s(trim(text));
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
        throw ConfigError(std::string(what) + ": '" + s + "' is not a number");
    }
    return v;
}

long long parse_int(std::string_view text, std::string_view what) {
    const std::string s(trim(text));
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
        throw ConfigError(std::string(what) + ": '" + s + "' is not an integer");
    }
    return v;
}

}  // namespace spk
