#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hiercheck/models.hpp"
#include "hiercheck/samplers.hpp"

namespace hiercheck {

[[nodiscard]] nlohmann::json to_json(const PriorSpec& prior);
[[nodiscard]] PriorSpec prior_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const ChainConfig& config);
[[nodiscard]] ChainConfig chain_config_from_json(const nlohmann::json& j);

/// Hex FNV-1a of the compact JSON dump; object keys are sorted, so this is stable.
[[nodiscard]] std::string config_hash(const nlohmann::json& config);

/**
 * @brief Header object carried by every emitted CSV.
 *
 * Records the producing operation, seed and a hash of `config`, plus any extra fields.
 */
[[nodiscard]] nlohmann::json csv_header(const std::string& operation, std::uint64_t seed,
                                        const nlohmann::json& config, nlohmann::json extra = nlohmann::json::object());

/// Shortest round-trip decimal form.
[[nodiscard]] std::string format_number(double x);

struct CsvTable {
    nlohmann::json header;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void write_csv(std::ostream& out, const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
/// Parses a numeric CSV with an optional leading `#` JSON header line.
[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);

/// Draws as a CSV table: header {operation, model, prior, config, seed, data_fingerprint, ...}.
[[nodiscard]] CsvTable draws_table(const PosteriorDraws& draws, const std::string& operation = "fit");
void write_draws_csv(const std::filesystem::path& path, const PosteriorDraws& draws,
                     const std::string& operation = "fit");
[[nodiscard]] PosteriorDraws read_draws_csv(const std::filesystem::path& path);

}  // namespace hiercheck
