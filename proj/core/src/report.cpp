#include "gcalc/report.hpp"

#include <charconv>
#include <cmath>

#include <json.hpp>

namespace gcalc {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json echo_object(const ConfigEcho& config) {
    ordered_json obj = ordered_json::object();
    for (const auto& [key, value] : config) obj[key] = value;
    return obj;
}

constexpr const char* kSchema = "gcalc-report/1";

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string stability_csv(const StabilityReport& report) {
    std::string out = "param,t,gap,bound,coeff_gap,verdict\n";
    for (const auto& row : report.rows) {
        out += format_double(row.param);
        out += ',';
        out += format_double(row.t);
        out += ',';
        out += format_double(row.gap);
        out += ',';
        if (row.bound) out += format_double(*row.bound);
        out += ',';
        out += format_double(row.coeff_gap);
        out += ',';
        out += row.verdict;
        out += '\n';
    }
    return out;
}

std::string stability_json(const StabilityReport& report, const ConfigEcho& config) {
    ordered_json doc;
    doc["schema"] = kSchema;
    doc["kind"] = "stability-" + report.experiment;
    doc["config"] = echo_object(config);
    doc["generic_constant"] = report.generic_constant;
    ordered_json rows = ordered_json::array();
    for (const auto& row : report.rows) {
        ordered_json r;
        r["param"] = row.param;
        r["t"] = row.t;
        r["gap"] = row.gap;
        if (row.bound)
            r["bound"] = *row.bound;
        else
            r["bound"] = nullptr;
        r["coeff_gap"] = row.coeff_gap;
        r["verdict"] = row.verdict;
        rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    doc["summary"] = {{"monotone", report.summary.monotone},
                      {"strictly_decreasing", report.summary.strictly_decreasing},
                      {"final_over_first", report.summary.final_over_first},
                      {"within_bounds", report.summary.within_bounds},
                      {"pass", report.summary.pass}};
    return doc.dump(2) + "\n";
}

std::string verify_csv(const VerifyReport& report) {
    std::string out = "check,value,tolerance,verdict\n";
    for (const auto& row : report.rows) {
        out += row.check;
        out += ',';
        out += format_double(row.value);
        out += ',';
        out += format_double(row.tolerance);
        out += ',';
        out += row.pass ? "pass" : "fail";
        out += '\n';
    }
    return out;
}

std::string verify_json(const VerifyReport& report, const ConfigEcho& config) {
    ordered_json doc;
    doc["schema"] = kSchema;
    doc["kind"] = "verify";
    doc["config"] = echo_object(config);
    ordered_json rows = ordered_json::array();
    for (const auto& row : report.rows) {
        ordered_json r;
        r["check"] = row.check;
        r["value"] = row.value;
        r["tolerance"] = row.tolerance;
        r["verdict"] = row.pass ? "pass" : "fail";
        rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    doc["summary"] = {{"pass", report.pass}};
    return doc.dump(2) + "\n";
}

std::string results_csv(const std::vector<std::pair<std::string, double>>& rows) {
    std::string out = "key,value\n";
    for (const auto& [key, value] : rows) {
        out += key;
        out += ',';
        out += format_double(value);
        out += '\n';
    }
    return out;
}

std::string results_json(const std::string& kind,
                         const std::vector<std::pair<std::string, double>>& rows,
                         const ConfigEcho& config) {
    ordered_json doc;
    doc["schema"] = kSchema;
    doc["kind"] = kind;
    doc["config"] = echo_object(config);
    ordered_json results = ordered_json::object();
    for (const auto& [key, value] : rows) results[key] = value;
    doc["results"] = std::move(results);
    return doc.dump(2) + "\n";
}

}  // namespace gcalc
