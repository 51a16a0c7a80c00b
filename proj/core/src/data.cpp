#include "tfn/data.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "tfn/errors.hpp"
#include "tfn/random.hpp"

namespace tfn {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put_le(std::ostream& os, T v) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(const unsigned char* p) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    return v;
}

std::vector<unsigned char> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view s, double& v) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(v);
}

json band_json(const std::vector<Band>& bands) {
    json j = json::array();
    for (const auto& b : bands) j.push_back({b.lo, b.hi});
    return j;
}

void check_frequency(double f, const std::string& key) {
    if (!(f > 0.0 && f < 0.5)) throw SpecError(key, "frequency " + std::to_string(f) + " outside (0, 0.5)");
}

void add_impulse_train(std::span<double> x, const ImpulseTrain& c, Rng& rng) {
    const double offset = rng.uniform() * c.period;
    const double tail = 10.0 / c.damping;  // exp(-10) of the initial amplitude
    const auto len = static_cast<double>(x.size());
    // Start early enough that ringing from earlier impulses is present at t = 0.
    double t_k = offset - std::ceil(tail / c.period) * c.period;
    for (; t_k < len; t_k += c.period) {
        const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil(t_k)));
        const double end = std::min(len, t_k + tail);
        for (std::size_t t = first; static_cast<double>(t) < end; ++t) {
            const double dt = static_cast<double>(t) - t_k;
            x[t] += c.amplitude * std::exp(-c.damping * dt) * std::cos(kTwoPi * c.resonance * dt);
        }
    }
}

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.meta = meta;
    out.samples = Tensor(indices.size(), samples.channels(), samples.length());
    out.labels.reserve(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const std::size_t src = indices[i];
        if (src >= size()) throw std::out_of_range("Dataset::subset: index out of range");
        std::copy_n(samples.sample(src).begin(), samples.sample(src).size(), out.samples.sample(i).begin());
        out.labels.push_back(labels[src]);
    }
    return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(meta.n_classes, 0);
    for (auto l : labels) {
        if (l >= counts.size()) counts.resize(l + 1, 0);
        ++counts[l];
    }
    return counts;
}

double component_frequency(const Component& c) {
    return std::visit(
        [](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Tone>) return v.frequency;
            else if constexpr (std::is_same_v<T, AmTone>) return v.carrier;
            else return v.resonance;
        },
        c);
}

SynthSpec synth_bearing5() {
    SynthSpec s;
    s.samples_per_class = 200;
    s.sample_length = 1024;
    s.noise_sigma = 1.0;
    s.classes = {
        {"N", {Tone{0.05, 0.5}}},
        {"A", {AmTone{0.08, 0.004, 1.0, 0.5}}},
        {"B", {ImpulseTrain{64.0, 0.18, 0.02, 1.0}}},
        {"C", {ImpulseTrain{100.0, 0.30, 0.02, 1.0}}},
        {"D", {ImpulseTrain{64.0, 0.18, 0.02, 1.0}, ImpulseTrain{100.0, 0.30, 0.02, 1.0}, Tone{0.08, 0.5}}},
    };
    s.bands = {{0.04, 0.06}, {0.07, 0.09}, {0.16, 0.20}, {0.28, 0.32}};
    return s;
}

void validate(const SynthSpec& spec) {
    if (spec.classes.empty()) throw SpecError("classes", "at least one class is required");
    if (spec.samples_per_class < 1) throw SpecError("samples_per_class", "must be >= 1");
    if (spec.sample_length < 2) throw SpecError("sample_length", "must be >= 2");
    if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma)) {
        throw SpecError("noise_sigma", "must be finite and non-negative");
    }
    for (std::size_t i = 0; i < spec.bands.size(); ++i) {
        const Band& b = spec.bands[i];
        if (!(b.lo >= 0.0 && b.hi <= 0.5 && b.lo < b.hi)) {
            throw SpecError("bands", "band " + std::to_string(i) + " must satisfy 0 <= lo < hi <= 0.5");
        }
        for (std::size_t j = 0; j < i; ++j) {
            const Band& o = spec.bands[j];
            if (b.lo <= o.hi && o.lo <= b.hi) {
                throw SpecError("bands", "bands " + std::to_string(j) + " and " + std::to_string(i) + " overlap");
            }
        }
    }
    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
        const auto& cls = spec.classes[c];
        for (std::size_t k = 0; k < cls.components.size(); ++k) {
            const std::string key = "classes[" + std::to_string(c) + "].components[" + std::to_string(k) + "]";
            const Component& comp = cls.components[k];
            check_frequency(component_frequency(comp), key);
            if (const auto* am = std::get_if<AmTone>(&comp)) {
                if (!(am->mod_rate > 0.0 && am->carrier - am->mod_rate > 0.0 && am->carrier + am->mod_rate < 0.5)) {
                    throw SpecError(key, "AM sidebands must stay inside (0, 0.5)");
                }
            }
            if (const auto* imp = std::get_if<ImpulseTrain>(&comp)) {
                if (!(imp->period >= 1.0)) throw SpecError(key, "impulse period must be >= 1 sample");
                if (!(imp->damping > 0.0)) throw SpecError(key, "damping must be positive");
            }
            if (!spec.bands.empty()) {
                const double f = component_frequency(comp);
                const bool covered = std::any_of(spec.bands.begin(), spec.bands.end(),
                                                 [f](const Band& b) { return b.contains(f); });
                if (!covered) throw SpecError("bands", "no band covers " + key + " at frequency " + std::to_string(f));
            }
        }
    }
}

std::string describe(const SynthSpec& spec) {
    json classes = json::array();
    for (const auto& cls : spec.classes) {
        json comps = json::array();
        for (const auto& comp : cls.components) {
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, Tone>) {
                        comps.push_back({{"type", "tone"}, {"frequency", v.frequency}, {"amplitude", v.amplitude}});
                    } else if constexpr (std::is_same_v<T, AmTone>) {
                        comps.push_back({{"type", "am"},
                                         {"carrier", v.carrier},
                                         {"mod_rate", v.mod_rate},
                                         {"amplitude", v.amplitude},
                                         {"depth", v.depth}});
                    } else {
                        comps.push_back({{"type", "impulse_train"},
                                         {"period", v.period},
                                         {"resonance", v.resonance},
                                         {"damping", v.damping},
                                         {"amplitude", v.amplitude}});
                    }
                },
                comp);
        }
        classes.push_back({{"name", cls.name}, {"components", comps}});
    }
    json j = {{"generator", "synthetic"},
              {"samples_per_class", spec.samples_per_class},
              {"sample_length", spec.sample_length},
              {"noise_sigma", spec.noise_sigma},
              {"bands", band_json(spec.bands)},
              {"classes", classes}};
    return j.dump();
}

Dataset synth_generate(const SynthSpec& spec, std::uint64_t seed) {
    validate(spec);
    const std::size_t n_classes = spec.n_classes();
    const std::size_t count = n_classes * spec.samples_per_class;
    const std::size_t len = spec.sample_length;

    Dataset ds;
    ds.samples = Tensor(count, 1, len);
    ds.labels.resize(count);
    ds.meta.n_classes = n_classes;
    ds.meta.bands = spec.bands;
    ds.meta.seed = seed;
    ds.meta.source = describe(spec);
    for (const auto& cls : spec.classes) ds.meta.class_names.push_back(cls.name);

    for (std::size_t c = 0; c < n_classes; ++c) {
        for (std::size_t i = 0; i < spec.samples_per_class; ++i) {
            const std::size_t idx = c * spec.samples_per_class + i;
            ds.labels[idx] = static_cast<std::uint32_t>(c);
            Rng rng(derive_seed(seed, "synth.sample", idx));
            auto x = ds.samples.sample(idx);
            for (double& v : x) v = spec.noise_sigma * rng.normal();
            for (const auto& comp : spec.classes[c].components) {
                if (const auto* tone = std::get_if<Tone>(&comp)) {
                    const double phase = kTwoPi * rng.uniform();
                    for (std::size_t t = 0; t < len; ++t)
                        x[t] += tone->amplitude * std::cos(kTwoPi * tone->frequency * static_cast<double>(t) + phase);
                } else if (const auto* am = std::get_if<AmTone>(&comp)) {
                    const double pm = kTwoPi * rng.uniform();
                    const double pc = kTwoPi * rng.uniform();
                    for (std::size_t t = 0; t < len; ++t) {
                        const double tt = static_cast<double>(t);
                        x[t] += am->amplitude * (1.0 + am->depth * std::cos(kTwoPi * am->mod_rate * tt + pm)) *
                                std::cos(kTwoPi * am->carrier * tt + pc);
                    }
                } else {
                    add_impulse_train(x, std::get<ImpulseTrain>(comp), rng);
                }
            }
        }
    }
    return ds;
}

std::vector<Signal> window_signal(std::span<const double> raw, std::size_t length, std::size_t overlap) {
    if (length == 0) throw std::invalid_argument("window_signal: window length must be positive");
    if (overlap >= length) throw std::invalid_argument("window_signal: overlap must be smaller than the window");
    if (raw.size() < length) {
        throw std::invalid_argument("window_signal: signal length " + std::to_string(raw.size()) +
                                    " is shorter than the window (" + std::to_string(length) + ")");
    }
    const std::size_t step = length - overlap;
    std::vector<Signal> out;
    for (std::size_t start = 0; start + length <= raw.size(); start += step) {
        out.emplace_back(raw.begin() + static_cast<std::ptrdiff_t>(start),
                         raw.begin() + static_cast<std::ptrdiff_t>(start + length));
    }
    return out;
}

Dataset dataset_from_signals(std::span<const std::pair<std::uint32_t, Signal>> recordings, std::size_t length,
                             std::size_t overlap) {
    std::vector<std::pair<std::uint32_t, Signal>> windows;
    std::uint32_t max_label = 0;
    for (const auto& [label, raw] : recordings) {
        for (auto& w : window_signal(raw, length, overlap)) windows.emplace_back(label, std::move(w));
        max_label = std::max(max_label, label);
    }
    Dataset ds;
    ds.samples = Tensor(windows.size(), 1, length);
    ds.meta.n_classes = recordings.empty() ? 0 : max_label + 1;
    ds.meta.source = json{{"generator", "recordings"}, {"window", length}, {"overlap", overlap}}.dump();
    for (std::size_t i = 0; i < windows.size(); ++i) {
        std::copy(windows[i].second.begin(), windows[i].second.end(), ds.samples.sample(i).begin());
        ds.labels.push_back(windows[i].first);
    }
    return ds;
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("split: train fraction must lie in (0, 1)");
    }
    const std::size_t n_classes = std::max<std::size_t>(dataset.meta.n_classes, dataset.class_counts().size());
    std::vector<std::vector<std::size_t>> by_class(n_classes);
    for (std::size_t i = 0; i < dataset.size(); ++i) by_class[dataset.labels[i]].push_back(i);

    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t c = 0; c < n_classes; ++c) {
        auto& idx = by_class[c];
        if (idx.empty()) continue;
        if (idx.size() < 2) {
            throw std::invalid_argument("split: class " + std::to_string(c) + " has fewer than 2 samples");
        }
        Rng rng(derive_seed(seed, "split", c));
        for (std::size_t i = idx.size() - 1; i > 0; --i) std::swap(idx[i], idx[rng.below(i + 1)]);
        auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(idx.size())));
        n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
        train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
        test_idx.insert(test_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    return {dataset.subset(train_idx), dataset.subset(test_idx)};
}

Signal load_signal_file(const fs::path& path, SignalFormat format) {
    Signal out;
    if (format == SignalFormat::csv) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path.string());
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string_view s = trim(line);
            if (s.empty()) continue;
            double v;
            if (!parse_double(s, v)) throw ParseError(path.string(), line_no, "not a finite number: '" + std::string(s) + "'");
            out.push_back(v);
        }
    } else {
        const auto bytes = read_bytes(path);
        if (bytes.size() % 8 != 0) {
            throw ParseError(path.string(), bytes.size() - bytes.size() % 8,
                             "truncated float64 stream (" + std::to_string(bytes.size()) + " bytes)");
        }
        out.resize(bytes.size() / 8);
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = get_le<double>(bytes.data() + 8 * i);
            if (!std::isfinite(out[i])) throw ParseError(path.string(), 8 * i, "non-finite value");
        }
    }
    if (out.empty()) throw ParseError(path.string(), 0, "empty signal");
    return out;
}

void save_signal_file(const fs::path& path, std::span<const double> signal, SignalFormat format) {
    if (format == SignalFormat::csv) {
        auto out = open_out(path);
        char buf[32];
        for (double v : signal) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << buf << '\n';
        }
    } else {
        auto out = open_out(path, std::ios::binary);
        for (double v : signal) put_le(out, v);
    }
}

void save_dataset(const Dataset& dataset, const fs::path& dir) {
    fs::create_directories(dir);
    json meta = {{"format", "tfn-dataset"},
                 {"version", 1},
                 {"count", dataset.size()},
                 {"channels", dataset.samples.channels()},
                 {"length", dataset.length()},
                 {"n_classes", dataset.meta.n_classes},
                 {"sample_rate", dataset.meta.sample_rate},
                 {"bands", band_json(dataset.meta.bands)},
                 {"class_names", dataset.meta.class_names},
                 {"class_counts", dataset.class_counts()},
                 {"seed", dataset.meta.seed ? json(*dataset.meta.seed) : json(nullptr)},
                 {"source", dataset.meta.source.empty() ? json(nullptr) : json::parse(dataset.meta.source)}};
    open_out(dir / "meta.json") << meta.dump(2) << '\n';

    auto samples = open_out(dir / "samples.f64le", std::ios::binary);
    for (double v : dataset.samples.values()) put_le(samples, v);
    auto labels = open_out(dir / "labels.u32le", std::ios::binary);
    for (auto l : dataset.labels) put_le(labels, l);
}

Dataset load_dataset(const fs::path& dir) {
    const fs::path meta_path = dir / "meta.json";
    std::ifstream in(meta_path);
    if (!in) throw std::runtime_error("cannot open " + meta_path.string());
    json meta;
    try {
        meta = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(meta_path.string(), e.byte, e.what());
    }
    Dataset ds;
    std::size_t count, channels, length;
    try {
        count = meta.at("count").get<std::size_t>();
        channels = meta.value("channels", std::size_t{1});
        length = meta.at("length").get<std::size_t>();
        ds.meta.n_classes = meta.at("n_classes").get<std::size_t>();
        ds.meta.sample_rate = meta.value("sample_rate", 1.0);
        for (const auto& b : meta.value("bands", json::array())) ds.meta.bands.push_back({b.at(0), b.at(1)});
        ds.meta.class_names = meta.value("class_names", std::vector<std::string>{});
        if (meta.contains("seed") && !meta["seed"].is_null()) ds.meta.seed = meta["seed"].get<std::uint64_t>();
        if (meta.contains("source") && !meta["source"].is_null()) ds.meta.source = meta["source"].dump();
    } catch (const json::exception& e) {
        throw ParseError(meta_path.string(), 0, e.what());
    }

    const auto sample_bytes = read_bytes(dir / "samples.f64le");
    if (sample_bytes.size() != count * channels * length * 8) {
        throw ParseError((dir / "samples.f64le").string(), sample_bytes.size(),
                         "expected " + std::to_string(count * channels * length * 8) + " bytes");
    }
    const auto label_bytes = read_bytes(dir / "labels.u32le");
    if (label_bytes.size() != count * 4) {
        throw ParseError((dir / "labels.u32le").string(), label_bytes.size(),
                         "expected " + std::to_string(count * 4) + " bytes");
    }
    ds.samples = Tensor(count, channels, length);
    auto v = ds.samples.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = get_le<double>(sample_bytes.data() + 8 * i);
    ds.labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        ds.labels[i] = get_le<std::uint32_t>(label_bytes.data() + 4 * i);
        if (ds.labels[i] >= ds.meta.n_classes) {
            throw ParseError((dir / "labels.u32le").string(), 4 * i, "label exceeds n_classes");
        }
    }
    return ds;
}

void save_dataset_csv(const Dataset& dataset, const fs::path& path) {
    auto out = open_out(path);
    char buf[32];
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        out << dataset.labels[i];
        for (double v : dataset.samples.sample(i)) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
}

Dataset load_dataset_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::uint32_t> labels;
    std::vector<double> values;
    std::size_t length = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            double v;
            if (!parse_double(cell, v)) throw ParseError(path.string(), line_no, "bad value '" + cell + "'");
            if (col == 0) {
                if (v < 0 || v != std::floor(v)) throw ParseError(path.string(), line_no, "label must be a non-negative integer");
                labels.push_back(static_cast<std::uint32_t>(v));
            } else {
                values.push_back(v);
            }
            ++col;
        }
        if (col < 2) throw ParseError(path.string(), line_no, "row needs a label and at least one value");
        if (length == 0) length = col - 1;
        if (col - 1 != length) throw ParseError(path.string(), line_no, "inconsistent row length");
    }
    Dataset ds;
    ds.samples = Tensor(labels.size(), 1, length);
    std::copy(values.begin(), values.end(), ds.samples.values().begin());
    ds.labels = std::move(labels);
    ds.meta.n_classes = ds.labels.empty() ? 0 : *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
    return ds;
}

}  // namespace tfn
