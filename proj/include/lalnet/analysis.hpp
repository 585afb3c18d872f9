#pragma once

#include <array>
#include <string>
#include <vector>

#include "lalnet/tensor.hpp"

namespace lalnet {

struct ChannelEnergy {
  double mean = 0.0;
  double low_energy = 1.0;   // fraction of squared-pixel energy in the approximation band
  double high_energy = 0.0;  // fraction in all detail bands
  bool degenerate = false;   // all-zero channel; reported as low_energy = 1 by convention
};

struct ChannelEnergyReport {
  std::array<ChannelEnergy, 3> channels;
};

/// Haar DWT energy split per RGB channel of a [3,H,W] image. With levels > 1 the
/// approximation band is decomposed again and every detail band counts as high frequency.
/// Odd extents are symmetrically padded by one sample before each level.
ChannelEnergyReport channel_energy_stats(const Tensor<double>& image, int levels = 1);
ChannelEnergyReport channel_energy_stats(const Tensor<float>& image, int levels = 1);

/// log(1+|S|) of one channel's 2D DFT, DC moved to the centre, min-max scaled to [0,1].
/// Non-power-of-two extents are symmetrically padded up first.
Tensor<double> spectrum_export(const Tensor<float>& image, int channel);

struct CorpusRow {
  std::string file;  // file name relative to the corpus directory
  int channel = 0;
  ChannelEnergy energy;
};

struct CorpusReport {
  std::vector<CorpusRow> rows;        // sorted by (file, channel)
  std::vector<std::string> warnings;  // skipped files
};

/// Statistics for every image in `dir`. Files that look like images but fail to decode are
/// skipped with a warning; other files are ignored. Throws if no image could be read.
CorpusReport corpus_report(const std::string& dir, int levels = 1);

/// Writes the CSV (file,channel,mean,low_energy,high_energy) and, when there are warnings,
/// a sidecar `<csv>.log`. With a spectra directory, also writes one PNG per file and channel.
void write_corpus_report(const CorpusReport& report, const std::string& csv_path);
void write_spectra(const std::string& dir, const std::string& out_dir);

}  // namespace lalnet
