#pragma once

#include "deepdisagg/core_model.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace deepdisagg {

struct EnergySeries {
  std::optional<std::string> appliance_id;
  // Epoch seconds, strictly increasing.
  std::vector<std::int64_t> timestamps;
  // Watts.
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  // Spacing of the first two samples; 0 for series shorter than 2.
  std::int64_t sampling_period() const;
};

struct HomeDataset {
  std::string home_id;
  std::map<std::string, EnergySeries> appliance_series;
  std::optional<EnergySeries> aggregate_series;
};

enum class MissingPolicy { drop_row, zero_fill };
// allow keeps signed values, e.g. for estimate files with a residual column.
enum class NegativePolicy { reject, clamp, allow };

struct CsvSchema {
  MissingPolicy missing = MissingPolicy::drop_row;
  NegativePolicy negative = NegativePolicy::reject;
  // Sort rows by timestamp; when false, out-of-order rows are an error.
  bool sort_rows = true;
  // Defaults to the file stem.
  std::optional<std::string> home_id;
  // Synthesize "aggregate" as the row sum of the appliance columns when the
  // file has none.
  bool synthesize_aggregate = true;
};

inline constexpr const char* kAggregateColumn = "aggregate";

// Header: timestamp,<id1>,<id2>,...[,aggregate]. Errors carry 1-based line
// numbers.
HomeDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
HomeDataset parse_csv(std::istream& in, const CsvSchema& schema, const std::string& home_id);

// Columns in key order; aggregate last when present.
void write_csv(std::ostream& out, const HomeDataset& home);

// Averages non-overlapping windows of window_seconds / period samples; the
// trailing partial window is dropped and each output sample is stamped with
// its window start.
EnergySeries resample_mean(const EnergySeries& series, std::int64_t window_seconds);

struct HomeSplit {
  std::vector<HomeDataset> train;
  std::vector<HomeDataset> test;
};

// Seeded shuffle, then test gets floor(n * (1 - train_fraction)) homes, at
// least one.
HomeSplit split_homes(std::vector<HomeDataset> homes, double train_fraction, std::uint64_t seed);

// Consecutive non-overlapping length-m segments as columns.
SignalMatrix windowize(const EnergySeries& series, Index m);

// Stacks the windows of several series side by side.
SignalMatrix concat_windows(const std::vector<SignalMatrix>& parts);

// Row-wise sum of the appliance series in key order.
EnergySeries sum_series(const std::map<std::string, EnergySeries>& series);

struct SynthConfig {
  std::size_t n_appliances = 3;
  std::vector<Index> layer_widths{24, 12};
  Index window_length = 64;
  // Windows per appliance in each training home.
  Index windows = 200;
  std::size_t n_homes = 1;
  // Windows of the extra held-out home "test"; none when 0.
  Index test_windows = 0;
  double density = 0.2;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  std::int64_t sample_period = 600;
  // Non-zero entries per dictionary column, as a fraction of its rows.
  double dictionary_density = 0.5;
};

struct SynthData {
  std::vector<HomeDataset> homes;
  std::vector<ApplianceModel> models;
};

void validate_config(const SynthConfig& cfg);

// Per appliance: non-negative unit-column layer dictionaries and
// non-negative codes at the requested density; windows are the chained
// product plus Gaussian noise, clamped at zero. Aggregate is the sum.
SynthData synth_generate(const SynthConfig& cfg);

}  // namespace deepdisagg
