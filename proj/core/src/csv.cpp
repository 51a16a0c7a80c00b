#include "tfn/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace tfn {
namespace {

std::ofstream open(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void check_close(std::ofstream& out, const std::filesystem::path& path) {
    out.close();
    if (!out) throw std::runtime_error("error writing " + path.string());
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_history_csv(const std::filesystem::path& path, const nn::TrainHistory& history) {
    auto out = open(path);
    out << "epoch,train_loss,train_acc,test_acc\n";
    for (const auto& e : history.epochs) {
        out << e.epoch << ',' << format_double(e.train_loss) << ',' << format_double(e.train_acc) << ','
            << format_double(e.test_acc) << '\n';
    }
    check_close(out, path);
}

void write_theta_csv(const std::filesystem::path& path, const nn::TrainHistory& history, const KernelParams& layout) {
    const std::size_t per = layout.per_channel();
    auto out = open(path);
    out << "epoch,channel";
    for (const auto& name : param_names(layout.family, layout.grid)) out << ',' << name;
    out << '\n';
    auto rows = [&](std::size_t epoch, const std::vector<double>& theta) {
        if (theta.size() != per * layout.n_channels) throw std::invalid_argument("write_theta_csv: layout mismatch");
        for (std::size_t c = 0; c < layout.n_channels; ++c) {
            out << epoch << ',' << c;
            for (std::size_t p = 0; p < per; ++p) out << ',' << format_double(theta[c * per + p]);
            out << '\n';
        }
    };
    rows(0, history.theta_initial);
    for (std::size_t e = 0; e < history.theta.size(); ++e) rows(e + 1, history.theta[e]);
    check_close(out, path);
}

void write_ofr_csv(const std::filesystem::path& path, std::span<const double> freqs, std::span<const double> ofr) {
    if (freqs.size() != ofr.size()) throw std::invalid_argument("write_ofr_csv: length mismatch");
    auto out = open(path);
    out << "freq,ofr\n";
    for (std::size_t k = 0; k < freqs.size(); ++k) out << format_double(freqs[k]) << ',' << format_double(ofr[k]) << '\n';
    check_close(out, path);
}

void write_cfr_csv(const std::filesystem::path& path, std::span<const double> freqs,
                   const std::vector<std::vector<double>>& cfr) {
    auto out = open(path);
    out << "channel,freq,magnitude\n";
    for (std::size_t c = 0; c < cfr.size(); ++c) {
        if (cfr[c].size() != freqs.size()) throw std::invalid_argument("write_cfr_csv: length mismatch");
        for (std::size_t k = 0; k < freqs.size(); ++k)
            out << c << ',' << format_double(freqs[k]) << ',' << format_double(cfr[c][k]) << '\n';
    }
    check_close(out, path);
}

void write_representations_csv(const std::filesystem::path& path, const Tensor& features,
                               std::span<const std::uint32_t> labels) {
    if (labels.size() != features.batch()) throw std::invalid_argument("write_representations_csv: label count");
    const std::size_t dim = features.channels() * features.length();
    auto out = open(path);
    out << "label";
    for (std::size_t d = 1; d <= dim; ++d) out << ",f" << d;
    out << '\n';
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out << labels[i];
        for (double v : features.sample(i)) out << ',' << format_double(v);
        out << '\n';
    }
    check_close(out, path);
}

void write_kernel_taps_csv(const std::filesystem::path& path, const TfConvLayer& layer) {
    auto out = open(path);
    out << "channel,n,re,im\n";
    for (std::size_t c = 0; c < layer.n_channels(); ++c) {
        const ComplexSeq taps = evaluate_kernel(layer.params.family, layer.params.channel(c), layer.grid());
        for (std::size_t i = 0; i < taps.size(); ++i) {
            out << c << ',' << layer.grid().index(i) << ',' << format_double(taps[i].real()) << ','
                << format_double(layer.modulus ? taps[i].imag() : 0.0) << '\n';
        }
    }
    check_close(out, path);
}

void write_band_report(const std::filesystem::path& path, const BandReport& report) {
    auto out = open(path);
    out << "threshold_factor = " << format_double(report.threshold_factor) << '\n';
    out << "ofr_median = " << format_double(report.ofr_median) << '\n';
    out << "threshold = " << format_double(report.threshold_factor * report.ofr_median) << '\n';
    for (const auto& b : report.bands) {
        out << "band [" << format_double(b.band.lo) << ", " << format_double(b.band.hi)
            << "] peak_frequency = " << format_double(b.peak_frequency)
            << " peak_magnitude = " << format_double(b.peak_magnitude) << " hit = " << (b.hit ? "yes" : "no")
            << '\n';
    }
    out << "hits = " << report.hits() << " / " << report.bands.size() << '\n';
    check_close(out, path);
}

void write_confusion_csv(const std::filesystem::path& path, const nn::Evaluation& eval) {
    auto out = open(path);
    out << "true";
    for (std::size_t p = 0; p < eval.confusion.size(); ++p) out << ",pred" << p;
    out << '\n';
    for (std::size_t t = 0; t < eval.confusion.size(); ++t) {
        out << t;
        for (auto v : eval.confusion[t]) out << ',' << v;
        out << '\n';
    }
    check_close(out, path);
}

}  // namespace tfn
