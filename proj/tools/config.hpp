#pragma once

#include <map>
#include <string>
#include <vector>

#include "fraccaloric/geometry.hpp"
#include "fraccaloric/stable.hpp"
#include "json.hpp"

namespace fc {

// Flat key=value experiment configuration; flags override file entries.
class Config {
  public:
    Config() = default;
    static Config from_file(const std::string& path);

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }
    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    double num(const std::string& key, double fallback) const;
    long long integer(const std::string& key, long long fallback) const;
    std::string str(const std::string& key, const std::string& fallback) const;
    std::vector<double> list(const std::string& key, const std::vector<double>& fallback) const;

    // effective values of every key that was read, for the summary echo
    nlohmann::ordered_json echo() const;

    Domain domain() const;       // from "domain" plus shape parameters
    StableModel model() const;   // from "d" and "alpha"

  private:
    std::map<std::string, std::string> kv_;
    mutable std::map<std::string, std::string> used_;
};

}  // namespace fc
