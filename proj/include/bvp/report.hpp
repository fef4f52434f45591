#pragma once

#include <cstdio>
#include <string>

#include "bvp/analysis.hpp"
#include "bvp/core.hpp"

#include "json.hpp"

namespace bvp {

enum class ReportFormat { StructuredObject, CommaSeparatedTable };

inline ReportFormat report_format_from(const std::string& name) {
    if (name == "json") return ReportFormat::StructuredObject;
    if (name == "table") return ReportFormat::CommaSeparatedTable;
    throw SimError(Err::UnsupportedFormat, "format must be 'json' or 'table'");
}

// All numbers in reports go through one formatter: nine significant digits,
// stable across runs, platforms, and worker counts.
inline std::string fmt_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

namespace detail {

inline std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::vector<std::pair<std::string, double>> sorted_params(const PointReport& pr) {
    auto params = pr.params;
    std::sort(params.begin(), params.end());
    return params;
}

inline std::string params_token(const PointReport& pr) {
    std::string out;
    for (const auto& [path, value] : sorted_params(pr)) {
        if (!out.empty()) out += ';';
        out += path + "=" + fmt_number(value);
    }
    return out;
}

}  // namespace detail

// Canonical structured-object serialization: keys sorted, fixed number
// formatting, schema version first in document order by key.
inline std::string emit_report_json(const AggregateReport& report) {
    std::string out = "{\n";
    out += "  \"master_seed\": " + std::to_string(report.master_seed) + ",\n";
    out += "  \"points\": [\n";
    for (std::size_t i = 0; i < report.points.size(); ++i) {
        const PointReport& pr = report.points[i];
        out += "    {\n";
        out += "      \"disclosure_hist\": {";
        bool first = true;
        for (const auto& [size, count] : pr.disclosure_hist) {
            if (!first) out += ", ";
            first = false;
            out += "\"" + std::to_string(size) + "\": " + std::to_string(count);
        }
        out += "},\n";
        out += "      \"means\": {";
        first = true;
        for (const auto& [name, value] : pr.means) {
            if (!first) out += ", ";
            first = false;
            out += "\"" + detail::json_escape(name) + "\": " + fmt_number(value);
        }
        out += "},\n";
        out += "      \"params\": {";
        first = true;
        for (const auto& [path, value] : detail::sorted_params(pr)) {
            if (!first) out += ", ";
            first = false;
            out += "\"" + detail::json_escape(path) + "\": " + fmt_number(value);
        }
        out += "},\n";
        out += "      \"rates\": {\n";
        first = true;
        for (const auto& [name, rate] : pr.rates) {
            if (!first) out += ",\n";
            first = false;
            out += "        \"" + detail::json_escape(name) + "\": {\"hi\": " +
                   fmt_number(rate.hi) + ", \"lo\": " + fmt_number(rate.lo) +
                   ", \"mean\": " + fmt_number(rate.mean) +
                   ", \"successes\": " + std::to_string(rate.successes) +
                   ", \"trials\": " + std::to_string(rate.trials) + "}";
        }
        out += "\n      },\n";
        out += "      \"trials\": " + std::to_string(pr.trials) + "\n";
        out += i + 1 < report.points.size() ? "    },\n" : "    }\n";
    }
    out += "  ],\n";
    out += "  \"protocol\": \"" + detail::json_escape(report.protocol) + "\",\n";
    out += "  \"schema\": \"" + detail::json_escape(report.schema) + "\",\n";
    out += "  \"trials_per_point\": " + std::to_string(report.trials_per_point) + "\n";
    out += "}\n";
    return out;
}

// Long-format comma-separated table. Column order is fixed:
// point,params,metric,successes,trials,mean,lo,hi
inline std::string emit_report_csv(const AggregateReport& report) {
    std::string out;
    out += "# schema: " + report.schema + "\n";
    out += "# protocol: " + report.protocol + "\n";
    out += "# master_seed: " + std::to_string(report.master_seed) + "\n";
    out += "# trials_per_point: " + std::to_string(report.trials_per_point) + "\n";
    out += "point,params,metric,successes,trials,mean,lo,hi\n";
    for (std::size_t i = 0; i < report.points.size(); ++i) {
        const PointReport& pr = report.points[i];
        const std::string point = std::to_string(i);
        const std::string params = detail::params_token(pr);
        for (const auto& [name, rate] : pr.rates) {
            out += point + "," + params + "," + name + "," + std::to_string(rate.successes) +
                   "," + std::to_string(rate.trials) + "," + fmt_number(rate.mean) + "," +
                   fmt_number(rate.lo) + "," + fmt_number(rate.hi) + "\n";
        }
        for (const auto& [name, value] : pr.means)
            out += point + "," + params + ",mean:" + name + ",,," + fmt_number(value) + ",,\n";
        for (const auto& [size, count] : pr.disclosure_hist)
            out += point + "," + params + ",hist:disclosure_size:" + std::to_string(size) + "," +
                   std::to_string(count) + ",,,,\n";
    }
    return out;
}

inline std::string emit_report(const AggregateReport& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::StructuredObject: return emit_report_json(report);
        case ReportFormat::CommaSeparatedTable: return emit_report_csv(report);
    }
    throw SimError(Err::UnsupportedFormat, "unknown report format");
}

// Structured-object reports parse back losslessly; emit(parse(emit(r))) is a
// fixed point.
inline AggregateReport parse_report(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SimError(Err::ParseError, e.what());
    }
    AggregateReport report;
    report.schema = doc.at("schema").get<std::string>();
    report.protocol = doc.at("protocol").get<std::string>();
    report.master_seed = doc.at("master_seed").get<std::uint64_t>();
    report.trials_per_point = doc.at("trials_per_point").get<int>();
    for (const auto& p : doc.at("points")) {
        PointReport pr;
        pr.trials = p.at("trials").get<int>();
        for (auto it = p.at("params").begin(); it != p.at("params").end(); ++it)
            pr.params.emplace_back(it.key(), it.value().get<double>());
        for (auto it = p.at("rates").begin(); it != p.at("rates").end(); ++it) {
            RateStat rate;
            rate.hi = it.value().at("hi").get<double>();
            rate.lo = it.value().at("lo").get<double>();
            rate.mean = it.value().at("mean").get<double>();
            rate.successes = it.value().at("successes").get<int>();
            rate.trials = it.value().at("trials").get<int>();
            pr.rates[it.key()] = rate;
        }
        for (auto it = p.at("means").begin(); it != p.at("means").end(); ++it)
            pr.means[it.key()] = it.value().get<double>();
        for (auto it = p.at("disclosure_hist").begin(); it != p.at("disclosure_hist").end(); ++it)
            pr.disclosure_hist[std::stoi(it.key())] = it.value().get<std::int64_t>();
        report.points.push_back(std::move(pr));
    }
    return report;
}

namespace detail {

inline double rate_or(const PointReport& pr, const std::string& name, double fallback) {
    auto it = pr.rates.find(name);
    return it == pr.rates.end() ? fallback : it->second.mean;
}

inline double mean_or(const PointReport& pr, const std::string& name, double fallback) {
    auto it = pr.means.find(name);
    return it == pr.means.end() ? fallback : it->second;
}

}  // namespace detail

// Side-by-side protocol comparison. The JSON form nests the two full
// reports; the table form keeps the headline columns the comparison is
// about.
inline std::string emit_comparison(const ComparisonReport& cmp, ReportFormat format) {
    if (format == ReportFormat::StructuredObject) {
        std::string out = "{\n";
        out += "  \"first\": " + emit_report_json(cmp.first);
        out.erase(out.find_last_of('\n'));  // drop trailing newline before comma
        out += ",\n  \"schema\": \"bvp-compare/1\",\n";
        out += "  \"second\": " + emit_report_json(cmp.second);
        out.erase(out.find_last_of('\n'));
        out += "\n}\n";
        return out;
    }
    std::string out;
    out += "# schema: bvp-compare/1\n";
    out += "protocol,point,params,undetected_violation,mean_disclosure_size,annulled,steps_per_voter\n";
    auto rows = [&](const AggregateReport& r) {
        for (std::size_t i = 0; i < r.points.size(); ++i) {
            const auto& pr = r.points[i];
            out += r.protocol + "," + std::to_string(i) + "," + detail::params_token(pr) + "," +
                   fmt_number(detail::rate_or(pr, "undetected_violation", 0.0)) + "," +
                   fmt_number(detail::mean_or(pr, "mean_disclosure_size", 0.0)) + "," +
                   fmt_number(detail::rate_or(pr, "annulled", 0.0)) + "," +
                   fmt_number(detail::mean_or(pr, "steps_per_voter", 0.0)) + "\n";
        }
    };
    rows(cmp.first);
    rows(cmp.second);
    return out;
}

}  // namespace bvp
