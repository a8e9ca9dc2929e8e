#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "hiercheck/models.hpp"

namespace hiercheck {

using Dataset = std::variant<GroupedNormalData, BetaBinomialData>;

/**
 * @brief Reads a dataset CSV.
 *
 * normal-hier: header `group,value`; labels map to indices by first appearance.
 * beta-binom: header `unit,successes,trials`.
 * Blank lines and lines starting with '#' are skipped. Errors name the physical line.
 */
[[nodiscard]] Dataset ingest_dataset(const std::filesystem::path& path, ModelKind model);
[[nodiscard]] Dataset ingest_dataset(std::istream& in, ModelKind model, const std::string& source = "<input>");

/// Writes a dataset in the ingest format, preceded by an optional `#` JSON header.
void write_dataset(std::ostream& out, const Dataset& data, const nlohmann::json& header = nullptr);
void write_dataset(const std::filesystem::path& path, const Dataset& data, const nlohmann::json& header = nullptr);

[[nodiscard]] std::string dataset_fingerprint(const Dataset& data);

}  // namespace hiercheck
