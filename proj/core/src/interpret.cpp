#include "tfn/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace tfn {
namespace {

void check_fft_len(std::size_t fft_len, std::size_t kernel_len) {
    if (fft_len < kernel_len) {
        throw std::invalid_argument("frequency response: FFT length " + std::to_string(fft_len) +
                                    " is shorter than the kernel (" + std::to_string(kernel_len) + " taps)");
    }
}

double median(std::vector<double> v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> folded_magnitude(std::span<const Complex> kernel, std::size_t fft_len) {
    check_fft_len(fft_len, kernel.size());
    const ComplexSeq w = dft(zero_pad(kernel, fft_len));
    std::vector<double> mag(fft_len / 2 + 1);
    for (std::size_t k = 0; k < mag.size(); ++k) {
        mag[k] = std::max(std::abs(w[k]), std::abs(w[(fft_len - k) % fft_len]));
    }
    return mag;
}

std::vector<std::vector<double>> channel_frequency_response(const TfConvLayer& layer, std::size_t fft_len) {
    check_fft_len(fft_len, layer.grid().length);
    std::vector<std::vector<double>> cfr;
    for (std::size_t c = 0; c < layer.n_channels(); ++c) {
        ComplexSeq taps = evaluate_kernel(layer.params.family, layer.params.channel(c), layer.grid());
        if (!layer.modulus)
            for (auto& z : taps) z = Complex(z.real(), 0.0);
        cfr.push_back(folded_magnitude(taps, fft_len));
    }
    return cfr;
}

std::vector<std::vector<double>> channel_frequency_response(const nn::Conv1d& conv, std::size_t fft_len) {
    check_fft_len(fft_len, conv.kernel_size());
    std::vector<std::vector<double>> cfr;
    for (std::size_t o = 0; o < conv.out_channels(); ++o) {
        ComplexSeq taps(conv.kernel_size());
        for (std::size_t i = 0; i < conv.in_channels(); ++i) {
            const auto k = conv.kernel(o, i);
            for (std::size_t m = 0; m < k.size(); ++m) taps[m] += k[m];
        }
        cfr.push_back(folded_magnitude(taps, fft_len));
    }
    return cfr;
}

std::vector<double> overall_frequency_response(const std::vector<std::vector<double>>& cfr) {
    if (cfr.empty() || cfr.front().empty()) throw std::invalid_argument("overall_frequency_response: empty C-FR");
    std::vector<double> ofr(cfr.front().size(), 0.0);
    for (const auto& row : cfr) {
        if (row.size() != ofr.size()) throw std::invalid_argument("overall_frequency_response: ragged C-FR");
        for (std::size_t k = 0; k < ofr.size(); ++k) ofr[k] += row[k];
    }
    for (double& v : ofr) v /= static_cast<double>(cfr.size());
    return ofr;
}

FrequencyResponse first_layer_response(const nn::Model& model, std::size_t fft_len) {
    FrequencyResponse fr;
    if (const auto* tf = model.tfconv()) {
        fr.cfr = channel_frequency_response(tf->layer(), fft_len);
    } else if (const auto* conv = model.first_conv()) {
        fr.cfr = channel_frequency_response(*conv, fft_len);
    } else {
        throw std::invalid_argument("model has no first-layer kernels");
    }
    fr.freqs = half_spectrum_freqs(fft_len);
    fr.ofr = overall_frequency_response(fr.cfr);
    return fr;
}

std::vector<double> dataset_spectrum(const Dataset& dataset) {
    if (dataset.empty()) throw std::invalid_argument("dataset_spectrum: empty dataset");
    const std::size_t len = dataset.samples.channels() * dataset.length();
    std::vector<double> acc(len / 2 + 1, 0.0);
    ComplexSeq buf(len);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto s = dataset.samples.sample(i);
        const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(len);
        double var = 0.0;
        for (double v : s) var += (v - mean) * (v - mean);
        var /= static_cast<double>(len);
        const double inv = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
        for (std::size_t t = 0; t < len; ++t) buf[t] = Complex((s[t] - mean) * inv, 0.0);
        const ComplexSeq spec = dft(buf);
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += std::abs(spec[k]);
    }
    for (double& v : acc) v /= static_cast<double>(dataset.size());
    return acc;
}

std::size_t BandReport::hits() const {
    return static_cast<std::size_t>(std::count_if(bands.begin(), bands.end(), [](const BandHit& b) { return b.hit; }));
}

std::vector<std::size_t> local_maxima(std::span<const double> v) {
    std::vector<std::size_t> out;
    const std::size_t n = v.size();
    if (n < 2) return out;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[j + 1] == v[i]) ++j;  // plateau [i, j]
        const bool left_ok = i == 0 || v[i - 1] < v[i];
        const bool right_ok = j == n - 1 || v[j + 1] < v[i];
        const bool whole = i == 0 && j == n - 1;
        if (left_ok && right_ok && !whole) out.push_back(i);
        i = j + 1;
    }
    return out;
}

BandReport band_coverage(std::span<const double> ofr, std::span<const double> freqs, std::span<const Band> bands,
                         double threshold_factor) {
    if (ofr.size() != freqs.size() || ofr.empty()) {
        throw std::invalid_argument("band_coverage: response and frequency axis must be non-empty and equal length");
    }
    for (const auto& b : bands) {
        if (!(b.lo >= 0.0 && b.hi <= 0.5 && b.lo <= b.hi)) {
            throw std::invalid_argument("band_coverage: malformed band [" + std::to_string(b.lo) + ", " +
                                        std::to_string(b.hi) + "]");
        }
    }
    BandReport report;
    report.threshold_factor = threshold_factor;
    report.ofr_median = median(std::vector<double>(ofr.begin(), ofr.end()));
    const double threshold = threshold_factor * report.ofr_median;
    const auto peaks = local_maxima(ofr);

    for (const auto& b : bands) {
        BandHit h;
        h.band = b;
        h.peak_frequency = std::numeric_limits<double>::quiet_NaN();
        h.peak_magnitude = -1.0;
        for (std::size_t p : peaks) {
            if (b.contains(freqs[p]) && ofr[p] > h.peak_magnitude) {
                h.peak_magnitude = ofr[p];
                h.peak_frequency = freqs[p];
            }
        }
        if (h.peak_magnitude >= 0.0) {
            h.hit = h.peak_magnitude >= threshold;
        } else {
            for (std::size_t k = 0; k < ofr.size(); ++k) {
                if (b.contains(freqs[k]) && ofr[k] > h.peak_magnitude) {
                    h.peak_magnitude = ofr[k];
                    h.peak_frequency = freqs[k];
                }
            }
            if (h.peak_magnitude < 0.0) h.peak_magnitude = 0.0;
        }
        report.bands.push_back(h);
    }
    return report;
}

Tensor export_representations(nn::Model& model, const Dataset& dataset, std::size_t batch_size) {
    if (dataset.empty()) throw std::invalid_argument("export_representations: empty dataset");
    Tensor out;
    for (std::size_t start = 0; start < dataset.size(); start += batch_size) {
        const std::size_t end = std::min(dataset.size(), start + batch_size);
        Tensor batch(end - start, dataset.samples.channels(), dataset.length());
        for (std::size_t i = start; i < end; ++i) {
            const auto s = dataset.samples.sample(i);
            std::copy(s.begin(), s.end(), batch.sample(i - start).begin());
        }
        const Tensor f = model.features(batch);
        if (out.empty()) out = Tensor(dataset.size(), f.channels() * f.length(), 1);
        std::copy(f.values().begin(), f.values().end(), out.sample(start).begin());
    }
    return out;
}

double separability_ratio(const Tensor& features, std::span<const std::uint32_t> labels) {
    const std::size_t n = features.batch();
    if (n == 0 || labels.size() != n) throw std::invalid_argument("separability_ratio: label count mismatch");
    const std::size_t dim = features.channels() * features.length();
    const std::size_t n_classes = *std::max_element(labels.begin(), labels.end()) + 1;

    std::vector<std::vector<double>> centroid(n_classes, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> count(n_classes, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto f = features.sample(i);
        for (std::size_t d = 0; d < dim; ++d) centroid[labels[i]][d] += f[d];
        ++count[labels[i]];
    }
    for (std::size_t c = 0; c < n_classes; ++c)
        if (count[c] > 0)
            for (double& v : centroid[c]) v /= static_cast<double>(count[c]);

    auto dist = [dim](std::span<const double> a, std::span<const double> b) {
        double s = 0.0;
        for (std::size_t d = 0; d < dim; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
        return std::sqrt(s);
    };
    double intra = 0.0;
    for (std::size_t i = 0; i < n; ++i) intra += dist(features.sample(i), centroid[labels[i]]);
    intra /= static_cast<double>(n);

    double inter = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < n_classes; ++a)
        for (std::size_t b = a + 1; b < n_classes; ++b)
            if (count[a] > 0 && count[b] > 0) {
                inter += dist(centroid[a], centroid[b]);
                ++pairs;
            }
    if (pairs == 0) throw std::invalid_argument("separability_ratio: need at least two classes");
    inter /= static_cast<double>(pairs);
    return intra > 0.0 ? inter / intra : std::numeric_limits<double>::infinity();
}

}  // namespace tfn
