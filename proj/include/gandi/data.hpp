#pragma once

// Shared data types: labeled experience samples, box bounds with min-max
// normalization, and small CSV / key-value file helpers.

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gandi {

enum class SampleLabel { on_target, off_target };

inline std::string to_string(SampleLabel l) {
    return l == SampleLabel::on_target ? "on_target" : "off_target";
}

/// One (context, action) record from search experience.
struct LabeledSample {
    std::vector<double> context;
    std::vector<double> action;
    SampleLabel label = SampleLabel::off_target;
};

/// Axis-aligned box; used for action spaces and feature normalization.
struct BoxBounds {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const { return lo.size(); }

    bool contains(const std::vector<double>& x) const {
        if (x.size() != lo.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        return true;
    }

    /// Map box coordinates to [-1, 1] per dimension.
    std::vector<double> normalize(const std::vector<double>& x) const {
        check(x);
        std::vector<double> out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double range = hi[i] - lo[i];
            out[i] = range > 0.0 ? 2.0 * (x[i] - lo[i]) / range - 1.0 : 0.0;
        }
        return out;
    }

    /// Map [-1, 1] coordinates back into the box, clamping to the bounds.
    /// Returns true through `clamped` when any coordinate was out of range.
    std::vector<double> denormalize_clamped(const std::vector<double>& u, bool* clamped = nullptr) const {
        check(u);
        if (clamped) *clamped = false;
        std::vector<double> out(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            double v = u[i];
            if (v < -1.0 || v > 1.0) {
                v = v < -1.0 ? -1.0 : 1.0;
                if (clamped) *clamped = true;
            }
            out[i] = lo[i] + (hi[i] - lo[i]) * 0.5 * (v + 1.0);
        }
        return out;
    }

private:
    void check(const std::vector<double>& x) const {
        if (x.size() != lo.size())
            throw std::invalid_argument("BoxBounds: dimension mismatch");
    }
};

inline BoxBounds concat(const BoxBounds& a, const BoxBounds& b) {
    BoxBounds out = a;
    out.lo.insert(out.lo.end(), b.lo.begin(), b.lo.end());
    out.hi.insert(out.hi.end(), b.hi.begin(), b.hi.end());
    return out;
}

inline std::vector<double> concat(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

// ---------------------------------------------------------------------------
// Flat "key = value" config files.

struct KeyValueConfig {
    std::map<std::string, std::string> values;

    static KeyValueConfig parse(std::istream& in) {
        KeyValueConfig cfg;
        std::string line;
        while (std::getline(in, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            cfg.values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
        return cfg;
    }

    static KeyValueConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config file: " + path);
        return parse(in);
    }

    bool has(const std::string& key) const { return values.count(key) > 0; }

    std::string get(const std::string& key, const std::string& fallback) const {
        auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }

    long get_int(const std::string& key, long fallback) const {
        auto it = values.find(key);
        return it == values.end() ? fallback : std::stol(it->second);
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values.find(key);
        return it == values.end() ? fallback : std::stod(it->second);
    }

    std::vector<long> get_int_list(const std::string& key, std::vector<long> fallback) const {
        auto it = values.find(key);
        if (it == values.end()) return fallback;
        std::vector<long> out;
        std::string item;
        std::istringstream ss(it->second);
        while (std::getline(ss, item, ',')) out.push_back(std::stol(trim(item)));
        return out;
    }

    std::vector<std::string> get_list(const std::string& key, std::vector<std::string> fallback) const {
        auto it = values.find(key);
        if (it == values.end()) return fallback;
        std::vector<std::string> out;
        std::string item;
        std::istringstream ss(it->second);
        while (std::getline(ss, item, ',')) out.push_back(trim(item));
        return out;
    }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }
};

// ---------------------------------------------------------------------------
// CSV helpers. All numeric output goes through a fixed format so identical
// runs produce identical bytes.

inline std::string csv_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(line);
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

/// FNV-1a digest of a byte string; used for config hashes and file digests.
inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace gandi
