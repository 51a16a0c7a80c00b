#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tfn/core_math.hpp"
#include "tfn/tensor.hpp"

namespace tfn {

/// Closed interval of normalized frequency.
struct Band {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double f) const { return f >= lo && f <= hi; }
    bool operator==(const Band&) const = default;
};

struct DatasetMeta {
    double sample_rate = 1.0;
    std::size_t n_classes = 0;
    std::vector<Band> bands;
    std::vector<std::string> class_names;
    std::optional<std::uint64_t> seed;
    /// JSON text describing how the data was produced.
    std::string source;
};

/// samples: (count, 1, length); labels[i] < meta.n_classes.
struct Dataset {
    Tensor samples;
    std::vector<std::uint32_t> labels;
    DatasetMeta meta;

    std::size_t size() const { return labels.size(); }
    std::size_t length() const { return samples.length(); }
    bool empty() const { return labels.empty(); }

    Dataset subset(std::span<const std::size_t> indices) const;
    std::vector<std::size_t> class_counts() const;
};

// ------------------------------------------------------------- synthesis

struct Tone {
    double frequency = 0.0;
    double amplitude = 1.0;
};

/// amplitude * (1 + depth cos(2 pi mod_rate t)) * cos(2 pi carrier t)
struct AmTone {
    double carrier = 0.0;
    double mod_rate = 0.0;
    double amplitude = 1.0;
    double depth = 0.5;
};

/// Periodic unit impulses filtered by amplitude * exp(-damping t) cos(2 pi resonance t).
struct ImpulseTrain {
    double period = 64.0;
    double resonance = 0.0;
    double damping = 0.02;
    double amplitude = 1.0;
};

using Component = std::variant<Tone, AmTone, ImpulseTrain>;

/// Frequency the component puts its energy at.
double component_frequency(const Component& c);

struct ClassSpec {
    std::string name;
    std::vector<Component> components;
};

struct SynthSpec {
    std::size_t samples_per_class = 200;
    std::size_t sample_length = 1024;
    double noise_sigma = 1.0;
    std::vector<ClassSpec> classes;
    std::vector<Band> bands;

    std::size_t n_classes() const { return classes.size(); }
};

/// Five classes: N (tone 0.05), A (AM 0.08), B (impulses at 0.18),
/// C (impulses at 0.30), D (0.18 + 0.30 resonances + tone 0.08), unit noise,
/// with information bands [0.04,0.06], [0.07,0.09], [0.16,0.20], [0.28,0.32].
SynthSpec synth_bearing5();

/// Throws SpecError naming the offending key (e.g. "bands", "noise_sigma").
void validate(const SynthSpec& spec);

/// JSON rendering of a spec, stored in DatasetMeta::source.
std::string describe(const SynthSpec& spec);

/// Deterministic per (spec, seed); samples are class-major and each sample
/// draws from its own stream derived from (seed, index).
Dataset synth_generate(const SynthSpec& spec, std::uint64_t seed);

// ------------------------------------------------------------- windowing / split

/// Consecutive windows with stride length - overlap; a trailing partial
/// window is discarded. Throws std::invalid_argument if raw is shorter than one window.
std::vector<Signal> window_signal(std::span<const double> raw, std::size_t length = 1024, std::size_t overlap = 0);

/// Builds a dataset from labelled raw recordings by windowing each one.
Dataset dataset_from_signals(std::span<const std::pair<std::uint32_t, Signal>> recordings, std::size_t length,
                             std::size_t overlap = 0);

/// Stratified random split; per class round(fraction * count) samples go to
/// train. Throws if fraction is outside (0, 1) or any class has < 2 samples.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction, std::uint64_t seed);

// ------------------------------------------------------------- files

enum class SignalFormat { csv, f64le };

/// csv: one value per line (blank lines skipped); f64le: raw little-endian
/// doubles. Throws ParseError with the line or byte offset on malformed input.
Signal load_signal_file(const std::filesystem::path& path, SignalFormat format);
void save_signal_file(const std::filesystem::path& path, std::span<const double> signal, SignalFormat format);

/// Directory container: meta.json, samples.f64le (row-major), labels.u32le.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

/// One row per sample: label,v0,v1,...
void save_dataset_csv(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset_csv(const std::filesystem::path& path);

}  // namespace tfn
