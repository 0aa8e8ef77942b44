#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "timeaware/chrono.hpp"

namespace timeaware::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;

struct RunConfig {
    std::string dataset_path;
    Schema schema = Schema::cocomo81;
    std::optional<std::string> partitions_path;
    std::vector<Approach> approaches;
    std::optional<ModelForm> form;  // derived per partition when unset
    double alpha_remove = 0.05;
    std::optional<double> cooks_threshold;  // 4/n when unset
    bool influence_filter = true;
    std::string out_dir;
};

// Output file names inside the run directory.
std::string results_file_name(const std::string& partition, Approach approach);
std::string coefficients_file_name(const std::string& partition, Approach approach);
std::string exclusions_file_name(const std::string& partition);

/// Loads, partitions, schedules and evaluates, then writes every output
/// file. Nothing is written unless the whole computation succeeds. Returns
/// an exit code; messages go to `log`.
int run_command(const RunConfig& config, std::ostream& log);

int compare_command(const std::string& results_a, const std::string& results_b,
                    std::ostream& out, std::ostream& log);

// Full command-line entry point (argv[0] included).
int main(int argc, char** argv, std::ostream& out, std::ostream& log);

}  // namespace timeaware::cli
