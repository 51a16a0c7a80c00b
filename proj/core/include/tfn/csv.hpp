#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tfn/interpret.hpp"
#include "tfn/nn/train.hpp"
#include "tfn/tfconv.hpp"

namespace tfn {

/// Shortest text that round-trips the double exactly ("%.17g").
std::string format_double(double v);

/// epoch,train_loss,train_acc,test_acc
void write_history_csv(const std::filesystem::path& path, const nn::TrainHistory& history);

/// epoch,channel,<parameter names>; epoch 0 holds the initial values.
void write_theta_csv(const std::filesystem::path& path, const nn::TrainHistory& history, const KernelParams& layout);

/// freq,ofr
void write_ofr_csv(const std::filesystem::path& path, std::span<const double> freqs, std::span<const double> ofr);

/// channel,freq,magnitude (long format)
void write_cfr_csv(const std::filesystem::path& path, std::span<const double> freqs,
                   const std::vector<std::vector<double>>& cfr);

/// label,f1,...,fD
void write_representations_csv(const std::filesystem::path& path, const Tensor& features,
                               std::span<const std::uint32_t> labels);

/// channel,n,re,im over the kernel grid.
void write_kernel_taps_csv(const std::filesystem::path& path, const TfConvLayer& layer);

/// Text manifest: threshold, median, one line per band, hit count.
void write_band_report(const std::filesystem::path& path, const BandReport& report);

/// true\predicted matrix with a header row.
void write_confusion_csv(const std::filesystem::path& path, const nn::Evaluation& eval);

}  // namespace tfn
