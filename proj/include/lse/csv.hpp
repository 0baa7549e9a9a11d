#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "lse/dataset.hpp"

namespace lse {

// Reads a UTF-8, comma-separated, header-first CSV file. Every column other
// than the id and target columns becomes a feature, in header order. Row
// order is preserved.
Dataset load_csv(const std::filesystem::path& path, const std::string& id_column,
                 const std::optional<std::string>& target_column, std::optional<Task> task);

// Writes id column first, then features, then the target (when present).
// Values are printed with 17 significant digits so a reload reproduces every
// cell to within 1e-9.
void save_csv(const Dataset& ds, const std::filesystem::path& path,
              const std::string& id_column = "id", const std::string& target_column = "target");

}  // namespace lse
