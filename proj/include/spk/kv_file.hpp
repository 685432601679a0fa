// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace spk {

// Flat `key=value` configuration. Blank lines and `#` comments are ignored; whitespace around
// keys and values is trimmed. Duplicate keys are rejected.
class KvFile {
public:
    static KvFile parse(std::istream& in, std::string_view source = "<input>");
    static KvFile read(const std::filesystem::path& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::vector<std::string> get_list(const std::string& key) const;  // comma separated

    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    const std::map<std::string, std::string>& values() const noexcept { return values_; }

    // Throws ConfigError naming the first key not in `known`.
    void require_known(const std::set<std::string>& known) const;

    void write(std::ostream& out) const;

private:
    std::string source_;
    std::map<std::string, std::string> values_;
};

std::vector<std::string> split_list(std::string_view text, char sep = ',');
double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

}  // namespace spk
