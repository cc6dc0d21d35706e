#include "config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fraccaloric/errors.hpp"

namespace fc {

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + " is not key=value");
        auto trim = [](std::string s) {
            size_t b = s.find_first_not_of(" \t\r");
            size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

double Config::num(const std::string& key, double fallback) const {
    auto it = kv_.find(key);
    double v = fallback;
    if (it != kv_.end()) {
        try {
            v = std::stod(it->second);
        } catch (...) {
            throw ConfigError("config key '" + key + "' is not numeric: " + it->second);
        }
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    used_[key] = buf;
    return v;
}

long long Config::integer(const std::string& key, long long fallback) const {
    double v = num(key, static_cast<double>(fallback));
    long long n = static_cast<long long>(v + (v >= 0 ? 0.5 : -0.5));
    used_[key] = std::to_string(n);
    return n;
}

std::string Config::str(const std::string& key, const std::string& fallback) const {
    auto it = kv_.find(key);
    std::string v = it != kv_.end() ? it->second : fallback;
    used_[key] = v;
    return v;
}

std::vector<double> Config::list(const std::string& key,
                                 const std::vector<double>& fallback) const {
    auto it = kv_.find(key);
    std::vector<double> out;
    if (it == kv_.end()) {
        out = fallback;
    } else {
        std::stringstream ss(it->second);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) out.push_back(std::stod(tok));
    }
    std::string echo;
    for (size_t i = 0; i < out.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", out[i]);
        echo += (i ? "," : "") + std::string(buf);
    }
    used_[key] = echo;
    return out;
}

nlohmann::ordered_json Config::echo() const {
    nlohmann::ordered_json j;
    for (const auto& [k, v] : used_) j[k] = v;
    return j;
}

Domain Config::domain() const {
    std::string name = str("domain", "unit-disk");
    Domain dom = [&]() {
        if (name == "ball") {
            int d = static_cast<int>(integer("d", 2));
            auto c = list("center", {0, 0, 0});
            c.resize(3, 0.0);
            return Domain::ball(d, pt(c[0], c[1], c[2]), num("radius", 1.0));
        }
        if (name == "box") {
            int d = static_cast<int>(integer("d", 2));
            auto lo = list("lo", {0, 0, 0});
            auto hi = list("hi", {1, 1, 1});
            lo.resize(3, 0.0);
            hi.resize(3, 0.0);
            return Domain::box(d, pt(lo[0], lo[1], lo[2]), pt(hi[0], hi[1], hi[2]));
        }
        if (name == "sector")
            return Domain::sector(num("radius", 1.0), num("angle", 1.5 * M_PI));
        if (name == "lshape") return Domain::lshape(num("size", 1.0), num("notch", 0.5));
        if (name == "polygon") {
            auto flat = list("vertices", {});
            if (flat.size() < 6 || flat.size() % 2)
                throw ConfigError("polygon needs vertices=x1,y1,x2,y2,...");
            std::vector<Pt> verts;
            for (size_t i = 0; i + 1 < flat.size(); i += 2)
                verts.push_back(pt(flat[i], flat[i + 1]));
            return Domain::polygon(verts);
        }
        return Domain::from_name(name);
    }();
    if (has("r0") || has("lipschitz"))
        dom.set_localization(num("r0", dom.r0()), num("lipschitz", dom.lipschitz()));
    if (has("x0")) {
        auto v = list("x0", {});
        v.resize(3, 0.0);
        dom.set_x0(pt(v[0], v[1], v[2]));
    }
    return dom;
}

StableModel Config::model() const {
    return StableModel(static_cast<int>(integer("d", 2)), num("alpha", 1.0));
}

}  // namespace fc
