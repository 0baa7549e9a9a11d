#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lse {

// One scenario run's metrics: (split, metric) -> value, plus run metadata.
// Rows keep insertion order; emitters group them into the familiar
// split-by-scenario table.
struct MetricsTable {
    std::string dataset;
    std::string task;
    int scenario = 0;
    std::uint64_t seed = 0;
    std::string config_digest;
    std::string started_at;   // ISO 8601 UTC; excluded from the CSV form
    std::string finished_at;

    struct Entry {
        std::string split;   // train / validation / test
        std::string metric;  // r2, mape, accuracy, precision, recall, ...
        double value = 0.0;
    };
    std::vector<Entry> entries;

    void add(const std::string& split, const std::string& metric, double value) {
        entries.push_back({split, metric, value});
    }

    bool operator==(const MetricsTable& other) const;
};

enum class ReportFormat { text, csv, json };
ReportFormat report_format_from_string(const std::string& s);

// text: metric rows grouped by split, one column per scenario, 2 decimals.
// csv: long form, full precision, deterministic (no timestamps).
// json: loss-free round trip including metadata.
std::string emit_report(const std::vector<MetricsTable>& tables, ReportFormat format);

std::vector<MetricsTable> parse_report_json(const std::string& text);

}  // namespace lse
