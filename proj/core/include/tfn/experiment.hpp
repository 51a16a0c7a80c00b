#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tfn/data.hpp"
#include "tfn/nn/model.hpp"
#include "tfn/nn/train.hpp"

namespace tfn {

/// One training run of the experiment grid.
struct CellSpec {
    nn::ModelSpec model;
    std::uint64_t seed = 0;
};

struct CellResult {
    CellSpec spec;
    nn::TrainHistory history;
    nn::Evaluation evaluation;
    std::shared_ptr<nn::Model> model;

    double test_accuracy() const { return evaluation.accuracy; }
};

/// Builds the model from (spec, seed), trains it with `config` (its seed is
/// replaced by one derived from the cell seed) and evaluates on `test`.
CellResult run_cell(const CellSpec& cell, const Dataset& train, const Dataset& test, const nn::TrainConfig& config);

/// Thread-safe memo of finished cells keyed by spec, seed and training config.
class CellCache {
public:
    std::shared_ptr<const CellResult> find(const CellSpec& cell, const nn::TrainConfig& config) const;
    void store(const CellSpec& cell, const nn::TrainConfig& config, std::shared_ptr<const CellResult> result);

private:
    static std::string key(const CellSpec& cell, const nn::TrainConfig& config);
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const CellResult>> cells_;
};

struct AblationGrid {
    std::vector<nn::AssemblyMode> modes = {nn::AssemblyMode::backbone_only, nn::AssemblyMode::tfn_add,
                                           nn::AssemblyMode::tfn_replace, nn::AssemblyMode::wkn_add,
                                           nn::AssemblyMode::wkn_replace};
    std::vector<KernelFamily> families = {KernelFamily::sttf};
    std::vector<std::uint64_t> seeds = {0, 1, 2};
    nn::BackboneKind backbone = nn::BackboneKind::paper_cnn;
    std::size_t tfconv_channels = 8;
    nn::TrainConfig train;
};

struct AblationRow {
    std::string model;
    std::string kernel;  // "-" for the backbone alone
    double mean_acc = 0.0;
    /// Population variance of the per-seed accuracies.
    double variance = 0.0;
    std::vector<double> accuracies;
};

struct AblationOutcome {
    std::vector<AblationRow> rows;
    /// Set when a cell failed; rows then hold only the completed groups.
    std::optional<std::string> error;
};

struct AblationOptions {
    /// Maximum number of cells trained concurrently.
    std::size_t threads = 1;
    CellCache* cache = nullptr;
    /// Called once per finished cell, serialized.
    std::function<void(const CellResult&)> on_cell;
};

/// Expands the grid into cells (the backbone alone once per seed, every other
/// mode once per family and seed) and aggregates accuracy per row. Cells
/// never share mutable state, so results do not depend on the thread count.
AblationOutcome run_ablation(const AblationGrid& grid, const Dataset& train, const Dataset& test,
                             const AblationOptions& options = {});

/// model,kernel,mean_acc,variance
void write_ablation_csv(const std::filesystem::path& path, const std::vector<AblationRow>& rows);

/// Parallelism cap from the TFN_THREADS environment variable (default 1).
std::size_t threads_from_env();

}  // namespace tfn
