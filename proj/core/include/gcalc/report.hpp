#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gcalc/stability.hpp"

namespace gcalc {

// Configuration echo embedded in JSON reports, in insertion order.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

// Shortest round-trip decimal form, locale-independent ('.') formatting.
std::string format_double(double v);

// CSV: '\n' line endings, header row always present, empty field for an
// absent bound. Identical inputs produce byte-identical output.
std::string stability_csv(const StabilityReport& report);
std::string stability_json(const StabilityReport& report, const ConfigEcho& config);

struct VerifyRow {
    std::string check;
    double value;  // worst observed metric for the check
    double tolerance;
    bool pass;
};

struct VerifyReport {
    std::vector<VerifyRow> rows;
    bool pass = false;
};

std::string verify_csv(const VerifyReport& report);
std::string verify_json(const VerifyReport& report, const ConfigEcho& config);

// Key/value result table used by the solver subcommands.
std::string results_csv(const std::vector<std::pair<std::string, double>>& rows);
std::string results_json(const std::string& kind,
                         const std::vector<std::pair<std::string, double>>& rows,
                         const ConfigEcho& config);

}  // namespace gcalc
