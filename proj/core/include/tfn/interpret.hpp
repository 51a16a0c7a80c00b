#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tfn/data.hpp"
#include "tfn/nn/model.hpp"
#include "tfn/tfconv.hpp"

namespace tfn {

/// Magnitude responses over the non-negative half axis, fft_len / 2 + 1 bins.
struct FrequencyResponse {
    std::vector<double> freqs;
    std::vector<std::vector<double>> cfr;  // channel x bin
    std::vector<double> ofr;
};

/// Per-channel |FFT| of the zero-padded kernel. Complex kernels are folded
/// onto the half axis by taking max(|W[k]|, |W[L-k]|), which leaves real
/// kernels unchanged and makes the result invariant under conjugation.
/// Layers without the modulus apply only the real kernel, so only that is used.
/// Throws std::invalid_argument if fft_len is shorter than the kernel.
std::vector<std::vector<double>> channel_frequency_response(const TfConvLayer& layer, std::size_t fft_len = 1024);

/// Plain convolution: each output channel's kernels are summed over input
/// channels before the transform.
std::vector<std::vector<double>> channel_frequency_response(const nn::Conv1d& conv, std::size_t fft_len = 1024);

/// Folded half-axis magnitude of one complex kernel.
std::vector<double> folded_magnitude(std::span<const Complex> kernel, std::size_t fft_len);

/// Channel mean per bin. Throws std::invalid_argument on an empty matrix.
std::vector<double> overall_frequency_response(const std::vector<std::vector<double>>& cfr);

/// Response of the model's first layer: the TFconv if present, else the first Conv.
FrequencyResponse first_layer_response(const nn::Model& model, std::size_t fft_len = 1024);

/// Mean over samples of the half-axis |DFT| of each z-scored sample.
std::vector<double> dataset_spectrum(const Dataset& dataset);

struct BandHit {
    Band band;
    double peak_frequency = 0.0;  // NaN when the band holds no bin
    double peak_magnitude = 0.0;
    bool hit = false;
};

struct BandReport {
    std::vector<BandHit> bands;
    double ofr_median = 0.0;
    double threshold_factor = 1.5;

    std::size_t hits() const;
};

/// A band is hit when a local maximum of the response with magnitude at least
/// threshold_factor * median lies inside it. The reported peak is the largest
/// local maximum in the band, or the largest bin when there is none.
/// Endpoints count as local maxima when they exceed their single neighbour.
BandReport band_coverage(std::span<const double> ofr, std::span<const double> freqs, std::span<const Band> bands,
                         double threshold_factor = 1.5);

/// Indices of strict local maxima (plateaus count once, at their first bin).
std::vector<std::size_t> local_maxima(std::span<const double> v);

/// Flatten-layer activations, inference mode: (n_samples, feature_dim, 1).
Tensor export_representations(nn::Model& model, const Dataset& dataset, std::size_t batch_size = 256);

/// Mean pairwise distance between class centroids divided by the mean
/// distance of samples to their own class centroid.
double separability_ratio(const Tensor& features, std::span<const std::uint32_t> labels);

}  // namespace tfn
