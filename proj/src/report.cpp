#include "lse/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "lse/error.hpp"

namespace lse {

using nlohmann::json;

bool MetricsTable::operator==(const MetricsTable& other) const {
    if (dataset != other.dataset || task != other.task || scenario != other.scenario ||
        seed != other.seed || config_digest != other.config_digest ||
        started_at != other.started_at || finished_at != other.finished_at ||
        entries.size() != other.entries.size())
        return false;
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (entries[i].split != other.entries[i].split ||
            entries[i].metric != other.entries[i].metric ||
            entries[i].value != other.entries[i].value)
            return false;
    return true;
}

ReportFormat report_format_from_string(const std::string& s) {
    if (s == "text") return ReportFormat::text;
    if (s == "csv") return ReportFormat::csv;
    if (s == "json") return ReportFormat::json;
    throw usage_error("unknown report format '" + s + "' (expected text, csv or json)");
}

namespace {

std::string emit_text(const std::vector<MetricsTable>& tables) {
    // Group tables by dataset/task, order columns by scenario.
    std::vector<std::pair<std::string, std::vector<const MetricsTable*>>> groups;
    for (const auto& t : tables) {
        const std::string key = t.dataset + " (" + t.task + ")";
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const auto& g) { return g.first == key; });
        if (it == groups.end()) {
            groups.push_back({key, {}});
            it = groups.end() - 1;
        }
        it->second.push_back(&t);
    }

    std::ostringstream out;
    char buf[64];
    for (auto& [key, group] : groups) {
        std::sort(group.begin(), group.end(),
                  [](const MetricsTable* a, const MetricsTable* b) { return a->scenario < b->scenario; });
        out << key << "\n";

        // Stable union of metric names per split, in first-seen order.
        const std::vector<std::string> split_order = {"train", "validation", "test"};
        std::vector<std::string> metric_order;
        for (const auto* t : group)
            for (const auto& e : t->entries)
                if (std::find(metric_order.begin(), metric_order.end(), e.metric) == metric_order.end())
                    metric_order.push_back(e.metric);

        out << "  " << std::string(24, ' ');
        for (const auto* t : group) {
            std::snprintf(buf, sizeof(buf), "%12s", ("Scenario " + std::to_string(t->scenario)).c_str());
            out << buf;
        }
        out << "\n";

        for (const auto& split : split_order) {
            bool split_printed = false;
            for (const auto& metric : metric_order) {
                std::string row;
                bool any = false;
                for (const auto* t : group) {
                    const auto it = std::find_if(t->entries.begin(), t->entries.end(), [&](const auto& e) {
                        return e.split == split && e.metric == metric;
                    });
                    if (it == t->entries.end()) {
                        row += std::string(12 - 1, ' ') + "-";
                    } else {
                        std::snprintf(buf, sizeof(buf), "%12.2f", it->value);
                        row += buf;
                        any = true;
                    }
                }
                if (!any) continue;
                std::snprintf(buf, sizeof(buf), "  %-12s%-12s", split_printed ? "" : split.c_str(),
                              metric.c_str());
                out << buf << row << "\n";
                split_printed = true;
            }
        }
        out << "\n";
    }
    return out.str();
}

std::string emit_csv(const std::vector<MetricsTable>& tables) {
    std::ostringstream out;
    out << "dataset,task,scenario,seed,config_digest,split,metric,value\n";
    char buf[32];
    for (const auto& t : tables) {
        for (const auto& e : t.entries) {
            std::snprintf(buf, sizeof(buf), "%.17g", e.value);
            out << t.dataset << ',' << t.task << ',' << t.scenario << ',' << t.seed << ','
                << t.config_digest << ',' << e.split << ',' << e.metric << ',' << buf << "\n";
        }
    }
    return out.str();
}

json table_to_json(const MetricsTable& t) {
    json metrics = json::array();
    for (const auto& e : t.entries)
        metrics.push_back({{"split", e.split}, {"metric", e.metric}, {"value", e.value}});
    return json{{"dataset", t.dataset},
                {"task", t.task},
                {"scenario", t.scenario},
                {"seed", t.seed},
                {"config_digest", t.config_digest},
                {"started_at", t.started_at},
                {"finished_at", t.finished_at},
                {"metrics", metrics}};
}

}  // namespace

std::string emit_report(const std::vector<MetricsTable>& tables, ReportFormat format) {
    if (tables.empty()) throw usage_error("emit_report: no tables to emit");
    switch (format) {
        case ReportFormat::text: return emit_text(tables);
        case ReportFormat::csv: return emit_csv(tables);
        case ReportFormat::json: {
            json doc{{"reports", json::array()}};
            for (const auto& t : tables) doc["reports"].push_back(table_to_json(t));
            return doc.dump(2) + "\n";
        }
    }
    throw usage_error("emit_report: unknown format");
}

std::vector<MetricsTable> parse_report_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw data_error(std::string("report: invalid JSON: ") + e.what());
    }
    std::vector<MetricsTable> tables;
    try {
        for (const auto& jt : doc.at("reports")) {
            MetricsTable t;
            t.dataset = jt.at("dataset").get<std::string>();
            t.task = jt.at("task").get<std::string>();
            t.scenario = jt.at("scenario").get<int>();
            t.seed = jt.at("seed").get<std::uint64_t>();
            t.config_digest = jt.at("config_digest").get<std::string>();
            t.started_at = jt.at("started_at").get<std::string>();
            t.finished_at = jt.at("finished_at").get<std::string>();
            for (const auto& je : jt.at("metrics"))
                t.add(je.at("split").get<std::string>(), je.at("metric").get<std::string>(),
                      je.at("value").get<double>());
            tables.push_back(std::move(t));
        }
    } catch (const json::exception& e) {
        throw data_error(std::string("report: malformed document: ") + e.what());
    }
    return tables;
}

}  // namespace lse
