#include "tfn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "tfn/csv.hpp"

namespace tfn {

CellResult run_cell(const CellSpec& cell, const Dataset& train, const Dataset& test, const nn::TrainConfig& config) {
    if (train.meta.n_classes != 0 && train.meta.n_classes != cell.model.n_classes) {
        throw std::invalid_argument("dataset has " + std::to_string(train.meta.n_classes) +
                                    " classes but the model expects " + std::to_string(cell.model.n_classes));
    }
    CellResult r;
    r.spec = cell;
    nn::ModelSpec spec = cell.model;
    spec.input_length = train.length();
    r.model = std::make_shared<nn::Model>(nn::assemble_model(spec, cell.seed));
    nn::TrainConfig cfg = config;
    cfg.seed = derive_seed(cell.seed, "train");
    r.history = nn::train(*r.model, train, &test, cfg);
    r.evaluation = nn::evaluate(*r.model, test);
    return r;
}

std::string CellCache::key(const CellSpec& cell, const nn::TrainConfig& c) {
    std::ostringstream os;
    os << nn::to_string(cell.model.mode) << '|' << nn::to_string(cell.model.backbone) << '|'
       << to_string(cell.model.family) << '|' << cell.model.tfconv_channels << '|' << cell.model.n_classes << '|'
       << cell.model.input_length << '|' << cell.seed << '|' << c.epochs << '|' << format_double(c.initial_lr) << '|'
       << format_double(c.lr_decay) << '|' << format_double(c.adam_beta1) << '|' << format_double(c.adam_beta2)
       << '|' << format_double(c.adam_eps) << '|' << c.batch_size;
    return os.str();
}

std::shared_ptr<const CellResult> CellCache::find(const CellSpec& cell, const nn::TrainConfig& config) const {
    std::lock_guard lock(mutex_);
    const auto it = cells_.find(key(cell, config));
    return it == cells_.end() ? nullptr : it->second;
}

void CellCache::store(const CellSpec& cell, const nn::TrainConfig& config, std::shared_ptr<const CellResult> result) {
    std::lock_guard lock(mutex_);
    cells_[key(cell, config)] = std::move(result);
}

AblationOutcome run_ablation(const AblationGrid& grid, const Dataset& train, const Dataset& test,
                             const AblationOptions& options) {
    if (grid.seeds.empty()) throw std::invalid_argument("ablation: seed list is empty");
    if (grid.modes.empty()) throw std::invalid_argument("ablation: mode list is empty");

    struct Group {
        std::string model, kernel;
        std::vector<std::size_t> cells;
    };
    std::vector<Group> groups;
    std::vector<CellSpec> cells;
    for (auto mode : grid.modes) {
        std::vector<KernelFamily> families = grid.families;
        if (mode == nn::AssemblyMode::backbone_only) families = {KernelFamily::sttf};
        if (mode == nn::AssemblyMode::random_tfn) families = {KernelFamily::random};
        for (auto family : families) {
            Group g;
            g.model = std::string(nn::to_string(mode));
            g.kernel = mode == nn::AssemblyMode::backbone_only ? "-" : std::string(to_string(family));
            for (auto seed : grid.seeds) {
                CellSpec c;
                c.model.mode = mode;
                c.model.backbone = grid.backbone;
                c.model.family = family;
                c.model.n_classes = train.meta.n_classes;
                c.model.tfconv_channels = grid.tfconv_channels;
                c.model.input_length = train.length();
                c.seed = seed;
                g.cells.push_back(cells.size());
                cells.push_back(c);
            }
            groups.push_back(std::move(g));
        }
    }

    std::vector<std::shared_ptr<const CellResult>> results(cells.size());
    std::vector<std::string> errors(cells.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex callback_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size() || failed.load()) return;
            try {
                std::shared_ptr<const CellResult> r = options.cache ? options.cache->find(cells[i], grid.train) : nullptr;
                if (!r) {
                    r = std::make_shared<const CellResult>(run_cell(cells[i], train, test, grid.train));
                    if (options.cache) options.cache->store(cells[i], grid.train, r);
                }
                results[i] = r;
                if (options.on_cell) {
                    std::lock_guard lock(callback_mutex);
                    options.on_cell(*r);
                }
            } catch (const std::exception& e) {
                errors[i] = std::string(nn::to_string(cells[i].model.mode)) + "/" +
                            std::string(to_string(cells[i].model.family)) + "/seed " +
                            std::to_string(cells[i].seed) + ": " + e.what();
                failed.store(true);
            }
        }
    };
    const std::size_t n_threads = std::clamp<std::size_t>(options.threads, 1, cells.size());
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    AblationOutcome outcome;
    for (const auto& e : errors)
        if (!e.empty()) {
            outcome.error = e;
            break;
        }
    for (const auto& g : groups) {
        AblationRow row;
        row.model = g.model;
        row.kernel = g.kernel;
        bool complete = true;
        for (auto i : g.cells) {
            if (!results[i]) {
                complete = false;
                break;
            }
            row.accuracies.push_back(results[i]->test_accuracy());
        }
        if (!complete) continue;
        const double n = static_cast<double>(row.accuracies.size());
        for (double a : row.accuracies) row.mean_acc += a;
        row.mean_acc /= n;
        for (double a : row.accuracies) row.variance += (a - row.mean_acc) * (a - row.mean_acc);
        row.variance /= n;
        outcome.rows.push_back(std::move(row));
    }
    return outcome;
}

void write_ablation_csv(const std::filesystem::path& path, const std::vector<AblationRow>& rows) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "model,kernel,mean_acc,variance\n";
    for (const auto& r : rows)
        out << r.model << ',' << r.kernel << ',' << format_double(r.mean_acc) << ',' << format_double(r.variance)
            << '\n';
}

std::size_t threads_from_env() {
    const char* v = std::getenv("TFN_THREADS");
    if (!v || !*v) return 1;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 1) return 1;
    return static_cast<std::size_t>(n);
}

}  // namespace tfn
