#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgnls::app {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

struct RunOptions {
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::optional<int> workers;
    bool strict = false;
};

enum ExitCode : int { kOk = 0, kConfig = 2, kAnomaly = 3 };

const std::vector<std::string>& experiments();
nlohmann::json default_config(const std::string& experiment);
// Defaults overlaid with the user config and flag overrides; throws ConfigError listing every bad field.
nlohmann::json resolve_config(const std::string& experiment, const nlohmann::json& user, const RunOptions& opts);
std::string config_hash(const nlohmann::json& resolved);
nlohmann::json schema();

// Runs one experiment into opts.out_dir; returns the process exit code.
int run(const std::string& experiment, const RunOptions& opts, std::ostream& log);

struct ReportRow {
    std::string experiment;
    std::uint64_t seed = 0;
    std::string quantity;
    double fitted = 0.0;
    double predicted = 0.0;
    std::string run_dir;
};
std::vector<ReportRow> collect_report(const std::vector<std::string>& dirs, std::vector<std::string>& skipped);
void write_report(const std::vector<ReportRow>& rows, std::ostream& os);

}  // namespace kgnls::app
