#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "e1lab/errors.hpp"

namespace e1lab {

/// A checked inequality: `value <= bound` (bounds already include tolerances).
struct Claim {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
};

inline Claim make_claim(std::string name, double value, double bound) {
    return {std::move(name), value, bound, value <= bound};
}

struct ResultRecord {
    std::string command;
    std::string inputs_digest;
    std::map<std::string, double> scalars;
    std::map<std::string, double> residuals;
    std::map<std::string, std::vector<double>> arrays;
    std::vector<Claim> claims;
    std::map<std::string, std::string> notes;

    bool pass() const {
        for (const auto& c : claims)
            if (!c.pass) return false;
        return true;
    }
};

/// FNV-1a 64-bit.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Reals with 17 significant digits; non-finite values as strings.
inline std::string format_real(double x) {
    if (std::isnan(x)) return "\"nan\"";
    if (std::isinf(x)) return x > 0 ? "\"inf\"" : "\"-inf\"";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace detail {

inline void write_json(const nlohmann::json& j, std::string& out, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{";
            out += nl;
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) {
                    out += ",";
                    out += nl;
                }
                first = false;
                out += pad + nlohmann::json(it.key()).dump() + (indent > 0 ? ": " : ":");
                write_json(it.value(), out, indent, depth + 1);
            }
            out += nl + close + "}";
            return;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            // Numeric arrays stay on one line.
            const bool flat = std::all_of(j.begin(), j.end(), [](const auto& e) { return e.is_primitive(); });
            out += "[";
            bool first = true;
            for (const auto& e : j) {
                if (!first) out += flat ? ", " : ",";
                if (!flat) out += nl + pad;
                first = false;
                write_json(e, out, indent, depth + 1);
            }
            if (!flat) out += nl + close;
            out += "]";
            return;
        }
        case nlohmann::json::value_t::number_float:
            out += format_real(j.get<double>());
            return;
        default:
            out += j.dump();
    }
}

}  // namespace detail

/// JSON text with every float printed as %.17g. Object keys are sorted, so
/// the output is canonical.
inline std::string dump_json(const nlohmann::json& j, int indent = 2) {
    std::string out;
    detail::write_json(j, out, indent, 0);
    return out;
}

/// Record body without the digest field.
inline nlohmann::json record_body(const ResultRecord& r) {
    nlohmann::json j;
    j["command"] = r.command;
    j["inputs_digest"] = r.inputs_digest;
    j["scalars"] = nlohmann::json::object();
    for (const auto& [k, v] : r.scalars) j["scalars"][k] = v;
    j["residuals"] = nlohmann::json::object();
    for (const auto& [k, v] : r.residuals) j["residuals"][k] = v;
    j["arrays"] = nlohmann::json::object();
    for (const auto& [k, v] : r.arrays) j["arrays"][k] = v;
    j["claims"] = nlohmann::json::array();
    for (const auto& c : r.claims)
        j["claims"].push_back({{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"pass", c.pass}});
    j["notes"] = nlohmann::json::object();
    for (const auto& [k, v] : r.notes) j["notes"][k] = v;
    j["pass"] = r.pass();
    return j;
}

/// FNV-1a of the compact canonical body.
inline std::string record_digest(const ResultRecord& r) { return hex64(fnv1a(dump_json(record_body(r), 0))); }

inline nlohmann::json record_json(const ResultRecord& r) {
    auto j = record_body(r);
    j["digest"] = record_digest(r);
    return j;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw SchemaError("cannot write " + path);
    f << text;
    if (!f) throw SchemaError("write failed: " + path);
}

/// CSV with a header row, ',' separator and %.17g reals. Columns must have
/// equal length.
inline std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& cols) {
    if (header.size() != cols.size()) throw DomainError("csv_table: header/column count mismatch");
    const std::size_t rows = cols.empty() ? 0 : cols[0].size();
    for (const auto& c : cols)
        if (c.size() != rows) throw DomainError("csv_table: ragged columns");
    std::string out;
    for (std::size_t k = 0; k < header.size(); ++k) out += (k ? "," : "") + header[k];
    out += "\n";
    char buf[40];
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = 0; k < cols.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", cols[k][r]);
            out += (k ? "," : "");
            out += buf;
        }
        out += "\n";
    }
    return out;
}

}  // namespace e1lab
