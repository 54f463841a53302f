#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace mrec {

inline constexpr const char* kFormatVersion = "markov-recovery v1";

/// %.12g, with inf/-inf/nan spelled out.
inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

using Cell = std::variant<std::monostate, double, long long, bool, std::string>;

inline std::string cell_text(const Cell& c) {
    struct V {
        std::string operator()(std::monostate) const { return ""; }
        std::string operator()(double x) const { return format_number(x); }
        std::string operator()(long long x) const { return std::to_string(x); }
        std::string operator()(bool x) const { return x ? "true" : "false"; }
        std::string operator()(const std::string& s) const { return s; }
    };
    return std::visit(V{}, c);
}

inline nlohmann::ordered_json cell_json(const Cell& c) {
    struct V {
        nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
        nlohmann::ordered_json operator()(double x) const {
            // JSON has no inf/nan; keep the textual form
            if (!std::isfinite(x)) return format_number(x);
            return nlohmann::ordered_json::parse(format_number(x));
        }
        nlohmann::ordered_json operator()(long long x) const { return x; }
        nlohmann::ordered_json operator()(bool x) const { return x; }
        nlohmann::ordered_json operator()(const std::string& s) const { return s; }
    };
    return std::visit(V{}, c);
}

/// Rows of named columns, emitted as versioned CSV or JSON.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }

    void write_csv(std::ostream& os) const {
        os << "# " << kFormatVersion << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
        os << "\n";
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << cell_text(r[i]);
            os << "\n";
        }
    }

    nlohmann::ordered_json to_json(const std::string& command) const {
        nlohmann::ordered_json j;
        j["format"] = kFormatVersion;
        j["command"] = command;
        j["rows"] = nlohmann::ordered_json::array();
        for (const auto& r : rows) {
            nlohmann::ordered_json o;
            for (std::size_t i = 0; i < r.size() && i < columns.size(); ++i) o[columns[i]] = cell_json(r[i]);
            j["rows"].push_back(o);
        }
        return j;
    }

    void write_json(std::ostream& os, const std::string& command) const { os << to_json(command).dump(2) << "\n"; }
};

} // namespace mrec
