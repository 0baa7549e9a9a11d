#include "lse/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <vector>

#include "lse/error.hpp"

namespace lse {

namespace {

std::vector<std::string_view> split_fields(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

double parse_number(std::string_view field, std::size_t row, const std::string& column) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t')) --last;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw data_error("csv: non-numeric value '" + std::string(field) + "' in column '" + column +
                         "' at data row " + std::to_string(row + 1));
    return value;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const std::string& id_column,
                 const std::optional<std::string>& target_column, std::optional<Task> task) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("csv: cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw data_error("csv: '" + path.string() + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string_view> fields;
    split_fields(line, fields);
    std::vector<std::string> header(fields.begin(), fields.end());

    std::ptrdiff_t id_idx = -1, target_idx = -1;
    std::vector<std::size_t> feature_cols;
    std::vector<std::string> feature_names;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == id_column) {
            id_idx = static_cast<std::ptrdiff_t>(c);
        } else if (target_column && header[c] == *target_column) {
            target_idx = static_cast<std::ptrdiff_t>(c);
        } else {
            feature_cols.push_back(c);
            feature_names.push_back(header[c]);
        }
    }
    if (id_idx < 0) throw data_error("csv: id column '" + id_column + "' not found in '" + path.string() + "'");
    if (target_column && target_idx < 0)
        throw data_error("csv: target column '" + *target_column + "' not found in '" + path.string() + "'");
    if (feature_cols.empty()) throw data_error("csv: no feature columns in '" + path.string() + "'");

    Dataset ds;
    ds.feature_names = feature_names;
    ds.task = task;
    std::vector<double> cells;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        split_fields(line, fields);
        if (fields.size() != header.size())
            throw data_error("csv: data row " + std::to_string(row + 1) + " has " +
                             std::to_string(fields.size()) + " fields, header has " +
                             std::to_string(header.size()));
        ds.ids.emplace_back(fields[static_cast<std::size_t>(id_idx)]);
        for (std::size_t k = 0; k < feature_cols.size(); ++k)
            cells.push_back(parse_number(fields[feature_cols[k]], row, feature_names[k]));
        if (target_idx >= 0)
            ds.target.push_back(parse_number(fields[static_cast<std::size_t>(target_idx)], row,
                                             *target_column));
        ++row;
    }

    ds.features = Matrix(row, feature_cols.size());
    ds.features.values() = std::move(cells);
    ds.validate();
    return ds;
}

void save_csv(const Dataset& ds, const std::filesystem::path& path, const std::string& id_column,
              const std::string& target_column) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw runtime_error("csv: cannot write '" + path.string() + "'");

    out << id_column;
    for (const auto& name : ds.feature_names) out << ',' << name;
    if (ds.has_target()) out << ',' << target_column;
    out << '\n';

    char buf[32];
    for (std::size_t i = 0; i < ds.num_rows(); ++i) {
        out << ds.ids[i];
        const double* row = ds.features.row(i);
        for (std::size_t c = 0; c < ds.num_features(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", row[c]);
            out << ',' << buf;
        }
        if (ds.has_target()) {
            std::snprintf(buf, sizeof(buf), "%.17g", ds.target[i]);
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw runtime_error("csv: write to '" + path.string() + "' failed");
}

}  // namespace lse
