/*
 * Copyright 2026 The seneca-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Deterministic JSON / CSV reports: metadata, (quantity, value, unit) rows
// and an optional energy ledger.

#pragma once

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "seneca/energy.hpp"
#include "seneca/errors.hpp"

namespace seneca {

enum class ReportFormat : std::uint8_t { json, csv };

inline ReportFormat parse_report_format(const std::string &s)
{
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    throw ValidationError("unknown format '" + s + "' (json, csv)");
}

/// Fixed-point rendering of a double, independent of the locale.
inline std::string format_fixed(double value, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    std::string s(buf);
    if (s == "-0" || s.rfind("-0.", 0) == 0) {
        if (s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    }
    return s;
}

/// 64-bit FNV-1a as 16 hex digits.
inline std::string fnv1a_hex(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

class Report {
public:
    struct Row {
        std::string quantity;
        std::string value; // already formatted
        std::string unit;
        bool numeric = true;
    };

    explicit Report(std::string command)
            : command_(std::move(command))
    {
    }

    void meta(const std::string &key, const std::string &value) { meta_.emplace_back(key, value); }

    void row(const std::string &quantity, double value, const std::string &unit, int decimals)
    {
        rows_.push_back({quantity, format_fixed(value, decimals), unit, true});
    }
    void row(const std::string &quantity, std::int64_t value, const std::string &unit)
    {
        rows_.push_back({quantity, std::to_string(value), unit, true});
    }
    void row(const std::string &quantity, Energy e, const std::string &unit = "pJ")
    {
        rows_.push_back({quantity, format_pj(e), unit, true});
    }
    void text(const std::string &quantity, const std::string &value, const std::string &unit = "")
    {
        rows_.push_back({quantity, value, unit, false});
    }

    void ledger(const EnergyLedger &l)
    {
        ledger_ = l;
        has_ledger_ = true;
    }

    const std::vector<Row> &rows() const noexcept { return rows_; }

    std::string to_json() const
    {
        nlohmann::ordered_json j;
        j["command"] = command_;
        nlohmann::ordered_json meta = nlohmann::ordered_json::object();
        for (const auto &[k, v] : meta_) meta[k] = v;
        j["metadata"] = meta;
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto &r : rows_) {
            nlohmann::ordered_json o;
            o["quantity"] = r.quantity;
            if (r.numeric) {
                o["value"] = nlohmann::ordered_json::parse(r.value);
            } else {
                o["value"] = r.value;
            }
            o["unit"] = r.unit;
            rows.push_back(std::move(o));
        }
        j["rows"] = rows;
        if (has_ledger_) {
            nlohmann::ordered_json entries = nlohmann::ordered_json::array();
            for (const auto &e : ledger_.entries()) {
                nlohmann::ordered_json o;
                o["category"] = e.category;
                o["count"] = e.count;
                o["unit_pJ"] = nlohmann::ordered_json::parse(format_pj(e.unit));
                o["subtotal_pJ"] = nlohmann::ordered_json::parse(format_pj(e.subtotal()));
                entries.push_back(std::move(o));
            }
            j["ledger"] = entries;
            j["ledger_total_pJ"] = nlohmann::ordered_json::parse(format_pj(ledger_.total()));
        }
        return j.dump(2) + "\n";
    }

    std::string to_csv() const
    {
        std::ostringstream out;
        for (const auto &[k, v] : meta_) out << "# " << k << ": " << v << '\n';
        out << "quantity,value,unit\n";
        for (const auto &r : rows_) out << csv_field(r.quantity) << ',' << csv_field(r.value) << ',' << csv_field(r.unit) << '\n';
        if (has_ledger_) {
            out << "\ncategory,count,unit_pJ,subtotal_pJ\n";
            for (const auto &e : ledger_.entries()) {
                out << csv_field(e.category) << ',' << e.count << ',' << format_pj(e.unit) << ','
                    << format_pj(e.subtotal()) << '\n';
            }
            out << "total,,," << format_pj(ledger_.total()) << '\n';
        }
        return out.str();
    }

    std::string render(ReportFormat f) const { return f == ReportFormat::json ? to_json() : to_csv(); }

private:
    static std::string csv_field(const std::string &s)
    {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + '"';
    }

    std::string command_;
    std::vector<std::pair<std::string, std::string>> meta_;
    std::vector<Row> rows_;
    EnergyLedger ledger_;
    bool has_ledger_ = false;
};

} // namespace seneca
