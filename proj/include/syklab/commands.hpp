#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "syklab/config.hpp"

namespace syklab {

// Collects the files a command writes into its output directory and, on
// finish(), archives the resolved config and a manifest with SHA-256 sums.
class OutputDir {
public:
    explicit OutputDir(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path path(std::string_view name) const { return root_ / name; }

    void write(const std::string& name, std::string_view contents);
    // Registers a file written by other means (e.g. a checkpoint).
    void add_existing(const std::string& name);
    void finish(const ExperimentConfig& config);

private:
    std::filesystem::path root_;
    std::vector<std::string> files_;
};

std::string sha256_hex(std::string_view data);

// Runs config.command; progress and results go to `log`. Errors propagate
// as the syklab exception types.
void run_command(const ExperimentConfig& config, std::ostream& log);

void cmd_sample(const ExperimentConfig& config, std::ostream& log);
void cmd_poissonize(const ExperimentConfig& config, std::ostream& log);
void cmd_correlators(const ExperimentConfig& config, std::ostream& log);
void cmd_decompose(const ExperimentConfig& config, std::ostream& log);
void cmd_metropolis(const ExperimentConfig& config, std::ostream& log);
void cmd_gram(const ExperimentConfig& config, std::ostream& log);

} // namespace syklab
