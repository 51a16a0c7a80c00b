#include "tfn_cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "tfn/csv.hpp"
#include "tfn/data.hpp"
#include "tfn/errors.hpp"
#include "tfn/experiment.hpp"
#include "tfn/interpret.hpp"
#include "tfn/nn/checkpoint.hpp"
#include "tfn_cli/config.hpp"

namespace tfn::cli {
namespace {

namespace fs = std::filesystem;

struct Key {
    std::string name;
    std::string fallback;
    std::string help;
};

const std::vector<Key> kSynthKeys = {
    {"samples_per_class", "200", "synthetic samples per class"},
    {"sample_length", "1024", "samples per window"},
    {"noise_sigma", "1", "Gaussian noise standard deviation"},
    {"bands", "0.04:0.06,0.07:0.09,0.16:0.20,0.28:0.32", "information bands lo:hi,..."},
    {"train_fraction", "0.6", "fraction of each class used for training"},
};

const std::vector<Key> kModelKeys = {
    {"backbone", "paper-cnn", "paper-cnn | lenet-1d | resnet-1d"},
    {"channels", "8", "TFconv channels"},
};

const std::vector<Key> kTrainKeys = {
    {"epochs", "50", "training epochs"},
    {"lr", "0.001", "initial learning rate"},
    {"lr_decay", "0.96", "learning-rate factor per epoch"},
    {"beta1", "0.9", "Adam beta1"},
    {"beta2", "0.999", "Adam beta2"},
    {"adam_eps", "1e-8", "Adam epsilon"},
    {"batch_size", "64", "mini-batch size"},
};

struct Command {
    std::string name;
    std::string help;
    std::vector<Key> keys;
    std::function<int(const Config&, const fs::path&, std::ostream&)> body;
    std::string seed_fallback = "0";
};

std::vector<Key> concat(std::initializer_list<std::vector<Key>> parts) {
    std::vector<Key> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

std::vector<Band> parse_bands(const std::string& text) {
    std::vector<Band> out;
    for (const auto& item : split_list(text)) {
        const auto colon = item.find(':');
        Band b;
        try {
            if (colon == std::string::npos) throw std::invalid_argument("");
            std::size_t used = 0;
            b.lo = std::stod(item.substr(0, colon), &used);
            if (used != colon) throw std::invalid_argument("");
            const std::string hi = item.substr(colon + 1);
            b.hi = std::stod(hi, &used);
            if (used != hi.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw ConfigError("bands: expected lo:hi pairs, got '" + item + "'");
        }
        out.push_back(b);
    }
    return out;
}

std::uint64_t single_seed(const Config& c) {
    const auto seeds = c.seeds("seed");
    if (seeds.size() != 1) throw ConfigError("seed: this command takes exactly one seed");
    return seeds.front();
}

SynthSpec synth_from(const Config& c) {
    SynthSpec spec = synth_bearing5();
    spec.samples_per_class = c.count("samples_per_class");
    spec.sample_length = c.count("sample_length");
    spec.noise_sigma = c.real("noise_sigma");
    spec.bands = parse_bands(c.str("bands"));
    validate(spec);
    return spec;
}

struct Splits {
    Dataset train, test;
};

Splits synth_splits(const Config& c, std::uint64_t seed) {
    const SynthSpec spec = synth_from(c);
    const double fraction = c.real("train_fraction");
    if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("train_fraction: must lie in (0, 1)");
    auto [train, test] = split(synth_generate(spec, derive_seed(seed, "data")), fraction, derive_seed(seed, "split"));
    return {std::move(train), std::move(test)};
}

/// `data` names a gen-data directory (train/ and test/); empty means synthesize.
Splits load_splits(const Config& c, std::uint64_t seed) {
    const std::string data = c.str("data");
    if (data.empty()) return synth_splits(c, seed);
    const fs::path dir(data);
    if (!fs::is_directory(dir / "train") || !fs::is_directory(dir / "test")) {
        throw ConfigError("data: " + data + " is not a dataset directory with train/ and test/");
    }
    return {load_dataset(dir / "train"), load_dataset(dir / "test")};
}

Dataset load_eval_set(const Config& c, std::uint64_t seed) {
    const std::string data = c.str("data");
    if (data.empty()) return synth_splits(c, seed).test;
    const fs::path dir(data);
    if (fs::is_directory(dir / "test")) return load_dataset(dir / "test");
    if (fs::exists(dir / "meta.json")) return load_dataset(dir);
    throw ConfigError("data: " + data + " holds no dataset");
}

nn::TrainConfig train_config(const Config& c) {
    nn::TrainConfig t;
    t.epochs = c.count("epochs");
    t.initial_lr = c.real("lr");
    t.lr_decay = c.real("lr_decay");
    t.adam_beta1 = c.real("beta1");
    t.adam_beta2 = c.real("beta2");
    t.adam_eps = c.real("adam_eps");
    t.batch_size = c.count("batch_size");
    try {
        t.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return t;
}

template <typename F>
auto as_config_error(const std::string& key, F&& f) {
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

void check_classes(const Dataset& d, std::size_t n_classes) {
    if (d.meta.n_classes != n_classes) {
        throw ConfigError("data: dataset has " + std::to_string(d.meta.n_classes) + " classes, the model expects " +
                          std::to_string(n_classes));
    }
}

nn::Model load_model(const Config& c) {
    const std::string path = c.str("checkpoint");
    if (path.empty()) throw ConfigError("checkpoint: missing setting");
    if (!fs::exists(path)) throw ConfigError("checkpoint: " + path + " does not exist");
    return nn::load_checkpoint(path);
}

// ---------------------------------------------------------------- commands

int cmd_gen_data(const Config& c, const fs::path& out, std::ostream& os) {
    const std::uint64_t seed = single_seed(c);
    auto [train, test] = synth_splits(c, seed);
    save_dataset(train, out / "train");
    save_dataset(test, out / "test");
    os << "train: " << train.size() << " samples, test: " << test.size() << " samples, " << train.meta.n_classes
       << " classes\n";
    return kExitOk;
}

int cmd_train(const Config& c, const fs::path& out, std::ostream& os) {
    const std::uint64_t seed = single_seed(c);
    CellSpec cell;
    cell.seed = seed;
    cell.model.mode = as_config_error("mode", [&] { return nn::parse_assembly_mode(c.str("mode")); });
    cell.model.backbone = as_config_error("backbone", [&] { return nn::parse_backbone(c.str("backbone")); });
    cell.model.family = as_config_error("family", [&] { return parse_kernel_family(c.str("family")); });
    cell.model.tfconv_channels = c.count("channels");
    cell.model.n_classes = c.count("n_classes");
    const nn::TrainConfig tc = train_config(c);
    const Splits data = load_splits(c, seed);
    check_classes(data.train, cell.model.n_classes);
    as_config_error("mode", [&] {
        nn::ModelSpec probe = cell.model;
        probe.input_length = data.train.length();
        return nn::assemble_model(probe, seed).size();
    });

    const CellResult r = run_cell(cell, data.train, data.test, tc);
    nn::save_checkpoint(*r.model, out / "checkpoint.tfn");
    write_history_csv(out / "history.csv", r.history);
    write_confusion_csv(out / "confusion.csv", r.evaluation);
    if (const auto* tf = r.model->tfconv()) write_theta_csv(out / "theta.csv", r.history, tf->layer().params);
    os << "final test accuracy: " << std::fixed << std::setprecision(4) << r.test_accuracy() << '\n';
    return kExitOk;
}

int cmd_eval(const Config& c, const fs::path& out, std::ostream& os) {
    const std::uint64_t seed = single_seed(c);
    nn::Model model = load_model(c);
    const Dataset data = load_eval_set(c, seed);
    check_classes(data, model.spec().n_classes);
    if (data.length() != model.spec().input_length) {
        throw ConfigError("data: sample length " + std::to_string(data.length()) + " does not match the model (" +
                          std::to_string(model.spec().input_length) + ")");
    }
    const nn::Evaluation ev = nn::evaluate(model, data);
    write_confusion_csv(out / "confusion.csv", ev);
    const Tensor reps = export_representations(model, data);
    write_representations_csv(out / "representations.csv", reps, data.labels);
    std::ofstream(out / "separability.txt") << "separability_ratio = "
                                             << format_double(separability_ratio(reps, data.labels)) << '\n';
    os << "accuracy: " << std::fixed << std::setprecision(4) << ev.accuracy << " on " << data.size() << " samples\n";
    return kExitOk;
}

int cmd_freq_response(const Config& c, const fs::path& out, std::ostream& os) {
    nn::Model model = load_model(c);
    const std::size_t fft_len = c.count("fft_len");
    const FrequencyResponse fr = as_config_error("fft_len", [&] { return first_layer_response(model, fft_len); });
    write_cfr_csv(out / "cfr.csv", fr.freqs, fr.cfr);
    write_ofr_csv(out / "ofr.csv", fr.freqs, fr.ofr);

    std::vector<Band> bands = parse_bands(c.str("bands"));
    if (!c.str("data").empty()) {
        const Dataset d = load_eval_set(c, single_seed(c));
        if (bands.empty()) bands = d.meta.bands;
        const auto spectrum = dataset_spectrum(d);
        write_ofr_csv(out / "dataset_spectrum.csv", half_spectrum_freqs(d.length()), spectrum);
    }
    os << fr.cfr.size() << " channels, " << fr.freqs.size() << " bins\n";
    if (!bands.empty()) {
        const BandReport report = band_coverage(fr.ofr, fr.freqs, bands, c.real("threshold"));
        write_band_report(out / "band_report.txt", report);
        os << "band hits: " << report.hits() << " / " << report.bands.size() << '\n';
    }
    return kExitOk;
}

int cmd_ablate(const Config& c, const fs::path& out, std::ostream& os) {
    AblationGrid grid;
    grid.seeds = c.seeds("seed");
    grid.modes.clear();
    for (const auto& m : c.list("modes"))
        grid.modes.push_back(as_config_error("modes", [&] { return nn::parse_assembly_mode(m); }));
    grid.families.clear();
    for (const auto& f : c.list("families"))
        grid.families.push_back(as_config_error("families", [&] { return parse_kernel_family(f); }));
    grid.backbone = as_config_error("backbone", [&] { return nn::parse_backbone(c.str("backbone")); });
    grid.tfconv_channels = c.count("channels");
    grid.train = train_config(c);
    if (grid.modes.empty()) throw ConfigError("modes: empty list");
    if (grid.families.empty()) throw ConfigError("families: empty list");

    const Splits data = load_splits(c, c.count("data_seed"));
    std::ofstream cells(out / "cells.csv");
    cells << "model,kernel,seed,test_acc\n";
    AblationOptions opts;
    opts.threads = threads_from_env();
    opts.on_cell = [&](const CellResult& r) {
        const bool backbone = r.spec.model.mode == nn::AssemblyMode::backbone_only;
        const std::string kernel = backbone ? "-" : std::string(to_string(r.spec.model.family));
        const std::string name = std::string(nn::to_string(r.spec.model.mode)) + "_" +
                                 (backbone ? "none" : kernel) + "_seed" + std::to_string(r.spec.seed);
        write_history_csv(out / "cells" / name / "history.csv", r.history);
        cells << nn::to_string(r.spec.model.mode) << ',' << kernel << ',' << r.spec.seed << ','
              << format_double(r.test_accuracy()) << '\n'
              << std::flush;
        os << name << ": " << std::fixed << std::setprecision(4) << r.test_accuracy() << '\n';
    };
    const AblationOutcome outcome = run_ablation(grid, data.train, data.test, opts);
    write_ablation_csv(out / "ablation.csv", outcome.rows);
    if (outcome.error) {
        os << "ablation aborted: " << *outcome.error << " (" << outcome.rows.size()
           << " completed rows kept in ablation.csv)\n";
        return kExitRuntime;
    }
    for (const auto& r : outcome.rows)
        os << r.model << " [" << r.kernel << "] mean " << std::fixed << std::setprecision(4) << r.mean_acc
           << " variance " << std::scientific << r.variance << std::defaultfloat << '\n';
    return kExitOk;
}

void export_one(const nn::Model& model, const fs::path& dir, std::size_t fft_len, const std::string& prefix) {
    const auto* tf = model.tfconv();
    if (!tf) throw std::runtime_error("checkpoint has no TFconv layer to export");
    write_kernel_taps_csv(dir / (prefix + "kernels.csv"), tf->layer());
    const auto cfr = as_config_error("fft_len", [&] { return channel_frequency_response(tf->layer(), fft_len); });
    write_cfr_csv(dir / (prefix + "kernel_fft.csv"), half_spectrum_freqs(fft_len), cfr);
}

int cmd_export_kernels(const Config& c, const fs::path& out, std::ostream& os) {
    const std::size_t fft_len = c.count("fft_len");
    const nn::Model after = load_model(c);
    const std::string before = c.str("before");
    if (before.empty()) {
        export_one(after, out, fft_len, "");
    } else {
        if (!fs::exists(before)) throw ConfigError("before: " + before + " does not exist");
        export_one(nn::load_checkpoint(before), out, fft_len, "before_");
        export_one(after, out, fft_len, "after_");
    }
    os << "exported " << after.tfconv()->layer().n_channels() << " channels of "
       << to_string(after.tfconv()->layer().params.family) << " kernels\n";
    return kExitOk;
}

std::vector<Command> commands() {
    const std::vector<Key> data_key = {{"data", "", "dataset directory from gen-data (empty: synthesize)"}};
    const std::vector<Key> ckpt = {{"checkpoint", "", "model checkpoint"}};
    const std::vector<Key> model_id = {{"mode", "tfn-add", "assembly mode"},
                                       {"family", "sttf", "kernel family"},
                                       {"n_classes", "5", "number of classes"}};
    std::vector<Command> out;
    out.push_back({"gen-data", "generate a synthetic dataset with a train/test split", kSynthKeys, cmd_gen_data});
    out.push_back({"train", "train one model",
                   concat({data_key, kSynthKeys, model_id, kModelKeys, kTrainKeys}), cmd_train});
    out.push_back({"eval", "evaluate a checkpoint and export representations",
                   concat({ckpt, data_key, kSynthKeys}), cmd_eval});
    out.push_back({"freq-response", "first-layer frequency responses and band coverage",
                   concat({ckpt,
                           {{"fft_len", "1024", "FFT length"},
                            {"data", "", "dataset whose bands and spectrum to use"},
                            {"bands", "", "bands lo:hi,... (default: the dataset's)"},
                            {"threshold", "1.5", "peak threshold as a multiple of the median"}}}),
                   cmd_freq_response});
    out.push_back({"ablate", "train the mode x kernel x seed grid",
                   concat({data_key,
                           {{"data_seed", "0", "seed for the synthesized dataset"},
                            {"modes", "backbone-only,tfn-add,tfn-replace,wkn-add,wkn-replace", "assembly modes"},
                            {"families", "sttf", "kernel families"}},
                           kSynthKeys, kModelKeys, kTrainKeys}),
                   cmd_ablate, "0,1,2"});
    out.push_back({"export-kernels", "write kernel taps and spectra",
                   concat({ckpt,
                           {{"before", "", "optional earlier checkpoint for comparison"},
                            {"fft_len", "1024", "FFT length"}}}),
                   cmd_export_kernels});
    return out;
}

std::string flag_name(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return "--" + key;
}

void prepare_output(const fs::path& out, bool force) {
    if (fs::exists(out)) {
        if (!fs::is_directory(out)) throw ConfigError("out: " + out.string() + " exists and is not a directory");
        if (!fs::is_empty(out)) {
            if (!force) throw ConfigError("out: " + out.string() + " is not empty (use --force to overwrite)");
            for (const auto& entry : fs::directory_iterator(out)) fs::remove_all(entry.path());
        }
    }
    fs::create_directories(out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Time-frequency convolution networks for vibration signal classification", "tfn"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "tfn 0.1.0");

    struct Parsed {
        std::string config_path, out_dir, seeds;
        bool force = false;
        std::map<std::string, std::string> flags;
    };
    const auto table = commands();
    std::vector<Parsed> parsed(table.size());
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < table.size(); ++i) {
        auto* sub = app.add_subcommand(table[i].name, table[i].help);
        auto& p = parsed[i];
        sub->add_option("--config", p.config_path, "key = value settings file");
        sub->add_option("--out", p.out_dir, "output directory")->required();
        sub->add_option("--seed", p.seeds, "seed or comma-separated seed list");
        sub->add_flag("--force", p.force, "overwrite a non-empty output directory");
        for (const auto& key : table[i].keys) {
            sub->add_option_function<std::string>(
                flag_name(key.name), [&p, name = key.name](const std::string& v) { p.flags[name] = v; },
                key.help + " (default: " + (key.fallback.empty() ? "none" : key.fallback) + ")");
        }
        subs.push_back(sub);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    std::size_t which = 0;
    while (!subs[which]->parsed()) ++which;
    const Command& cmd = table[which];
    const Parsed& p = parsed[which];

    fs::path out_dir;
    Config config;
    try {
        for (const auto& key : cmd.keys) config.set(key.name, key.fallback);
        config.set("seed", cmd.seed_fallback);
        if (!p.config_path.empty()) {
            const Config file = Config::load(p.config_path);
            // A file may be shared between commands; keys of other commands are skipped.
            for (const auto& [k, v] : file.values()) {
                auto has_key = [&](const Command& c) {
                    return std::any_of(c.keys.begin(), c.keys.end(), [&](const Key& key) { return key.name == k; });
                };
                if (k == "seed" || has_key(cmd)) {
                    config.set(k, v);
                } else if (std::none_of(table.begin(), table.end(), has_key)) {
                    throw ConfigError(k + ": unknown setting");
                }
            }
        }
        for (const auto& [k, v] : p.flags) config.set(k, v);
        if (!p.seeds.empty()) config.set("seed", p.seeds);
        config.seeds("seed");
        out_dir = p.out_dir;
        prepare_output(out_dir, p.force);
        std::ofstream(out_dir / "config.txt") << "# tfn " << cmd.name << "\n" << config.render();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ParseError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        return cmd.body(config, out_dir, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SpecError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace tfn::cli
