#include "deepdisagg/data_pipeline.hpp"

#include "deepdisagg/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string_view>

namespace deepdisagg {

std::int64_t EnergySeries::sampling_period() const {
  return timestamps.size() < 2 ? 0 : timestamps[1] - timestamps[0];
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_missing(std::string_view field) {
  return field.empty() || field == "nan" || field == "NaN" || field == "NA" || field == "null";
}

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
  throw std::runtime_error("line " + std::to_string(line) + ": " + what);
}

struct Row {
  std::size_t line = 0;
  std::int64_t timestamp = 0;
  std::vector<double> values;
};

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

HomeDataset parse_csv(std::istream& in, const CsvSchema& schema, const std::string& home_id) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw std::runtime_error("line 1: missing header");
  ++line_no;
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  std::vector<std::string> columns;
  for (auto field : split_fields(line)) columns.emplace_back(trim(field));
  if (columns.empty() || columns.front() != "timestamp") fail_at(1, "first column must be 'timestamp'");
  if (columns.size() < 2) fail_at(1, "no value columns");
  std::set<std::string> unique;
  for (std::size_t c = 1; c < columns.size(); ++c) {
    if (columns[c].empty()) fail_at(1, "empty column name");
    if (!unique.insert(columns[c]).second) fail_at(1, "duplicate column '" + columns[c] + "'");
  }
  const std::size_t n_values = columns.size() - 1;

  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != columns.size()) {
      fail_at(line_no, "expected " + std::to_string(columns.size()) + " fields, found " +
                           std::to_string(fields.size()));
    }
    Row row;
    row.line = line_no;
    const auto ts = trim(fields[0]);
    auto [ptr, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), row.timestamp);
    if (ec != std::errc() || ptr != ts.data() + ts.size()) fail_at(line_no, "malformed timestamp");

    bool drop = false;
    row.values.resize(n_values);
    for (std::size_t c = 0; c < n_values; ++c) {
      const auto field = trim(fields[c + 1]);
      if (is_missing(field)) {
        if (schema.missing == MissingPolicy::drop_row) drop = true;
        row.values[c] = 0.0;
        continue;
      }
      double v = 0.0;
      auto [vptr, vec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (vec != std::errc() || vptr != field.data() + field.size()) {
        fail_at(line_no, "malformed value in column '" + columns[c + 1] + "'");
      }
      if (!std::isfinite(v)) fail_at(line_no, "non-finite value in column '" + columns[c + 1] + "'");
      if (v < 0.0 && schema.negative != NegativePolicy::allow) {
        if (schema.negative == NegativePolicy::reject) {
          fail_at(line_no, "negative value in column '" + columns[c + 1] + "'");
        }
        v = 0.0;
      }
      row.values[c] = v;
    }
    if (!drop) rows.push_back(std::move(row));
  }

  if (schema.sort_rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.timestamp < b.timestamp; });
  }
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].timestamp == rows[r - 1].timestamp) {
      fail_at(std::max(rows[r].line, rows[r - 1].line),
              "duplicate timestamp " + std::to_string(rows[r].timestamp) + " (also on line " +
                  std::to_string(std::min(rows[r].line, rows[r - 1].line)) + ")");
    }
    if (rows[r].timestamp < rows[r - 1].timestamp) fail_at(rows[r].line, "non-monotone timestamp");
  }

  HomeDataset home;
  home.home_id = home_id;
  std::vector<EnergySeries> series(n_values);
  for (std::size_t c = 0; c < n_values; ++c) {
    series[c].appliance_id = columns[c + 1];
    series[c].timestamps.reserve(rows.size());
    series[c].values.reserve(rows.size());
  }
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < n_values; ++c) {
      series[c].timestamps.push_back(row.timestamp);
      series[c].values.push_back(row.values[c]);
    }
  }
  for (std::size_t c = 0; c < n_values; ++c) {
    if (columns[c + 1] == kAggregateColumn) {
      series[c].appliance_id.reset();
      home.aggregate_series = std::move(series[c]);
    } else {
      home.appliance_series.emplace(columns[c + 1], std::move(series[c]));
    }
  }
  if (!home.aggregate_series && schema.synthesize_aggregate && !home.appliance_series.empty()) {
    home.aggregate_series = sum_series(home.appliance_series);
  }
  return home;
}

HomeDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return parse_csv(in, schema, schema.home_id.value_or(path.stem().string()));
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_csv(std::ostream& out, const HomeDataset& home) {
  std::vector<const EnergySeries*> cols;
  out << "timestamp";
  for (const auto& [id, s] : home.appliance_series) {
    out << ',' << id;
    cols.push_back(&s);
  }
  if (home.aggregate_series) {
    out << ',' << kAggregateColumn;
    cols.push_back(&*home.aggregate_series);
  }
  out << '\n';
  if (cols.empty()) return;
  const std::size_t n = cols.front()->size();
  for (const auto* s : cols) {
    if (s->size() != n) throw std::invalid_argument("write_csv: series lengths differ");
  }
  for (std::size_t t = 0; t < n; ++t) {
    out << cols.front()->timestamps[t];
    for (const auto* s : cols) out << ',' << format_double(s->values[t]);
    out << '\n';
  }
}

EnergySeries sum_series(const std::map<std::string, EnergySeries>& series) {
  if (series.empty()) throw std::invalid_argument("sum_series: no series");
  EnergySeries out;
  const auto& first = series.begin()->second;
  out.timestamps = first.timestamps;
  out.values.assign(first.size(), 0.0);
  for (const auto& [id, s] : series) {
    if (s.timestamps != out.timestamps) throw std::invalid_argument("sum_series: '" + id + "' is misaligned");
    for (std::size_t t = 0; t < s.size(); ++t) out.values[t] += s.values[t];
  }
  return out;
}

EnergySeries resample_mean(const EnergySeries& series, std::int64_t window_seconds) {
  if (series.size() < 2) throw std::invalid_argument("resample_mean: need at least two samples");
  const std::int64_t period = series.sampling_period();
  if (period <= 0) throw std::invalid_argument("resample_mean: timestamps not increasing");
  for (std::size_t t = 1; t < series.size(); ++t) {
    if (series.timestamps[t] - series.timestamps[t - 1] != period) {
      throw std::invalid_argument("resample_mean: non-uniform sampling at index " + std::to_string(t));
    }
  }
  if (window_seconds < period) throw std::invalid_argument("resample_mean: window smaller than sampling period");
  if (window_seconds % period != 0) {
    throw std::invalid_argument("resample_mean: window must be a multiple of the sampling period");
  }
  const auto factor = static_cast<std::size_t>(window_seconds / period);
  EnergySeries out;
  out.appliance_id = series.appliance_id;
  const std::size_t n = series.size() / factor;
  for (std::size_t w = 0; w < n; ++w) {
    double sum = 0.0;
    for (std::size_t i = 0; i < factor; ++i) sum += series.values[w * factor + i];
    out.timestamps.push_back(series.timestamps[w * factor]);
    out.values.push_back(sum / static_cast<double>(factor));
  }
  return out;
}

HomeSplit split_homes(std::vector<HomeDataset> homes, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("split_homes: train_fraction must lie in (0, 1)");
  }
  const std::size_t n = homes.size();
  if (n < 2) throw std::invalid_argument("split_homes: need at least two homes");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(order[i], order[pick(rng)]);
  }
  // The epsilon absorbs representation error, e.g. 10 * (1 - 0.8) < 2.
  auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - train_fraction) + 1e-9));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

  HomeSplit split;
  for (std::size_t i = 0; i < n; ++i) {
    auto& side = i < n - n_test ? split.train : split.test;
    side.push_back(std::move(homes[order[i]]));
  }
  return split;
}

SignalMatrix windowize(const EnergySeries& series, Index m) {
  if (m < 1) throw std::invalid_argument("windowize: window length must be >= 1");
  const auto len = static_cast<Index>(series.size());
  if (len < m) {
    throw std::invalid_argument("windowize: series of length " + std::to_string(len) + " shorter than window " +
                                std::to_string(m));
  }
  const Index s = len / m;
  SignalMatrix out;
  out.data.resize(m, s);
  for (Index j = 0; j < s; ++j)
    for (Index i = 0; i < m; ++i) out.data(i, j) = series.values[static_cast<std::size_t>(j * m + i)];
  out.window_seconds = static_cast<double>(m * series.sampling_period());
  return out;
}

SignalMatrix concat_windows(const std::vector<SignalMatrix>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_windows: nothing to concatenate");
  Index cols = 0;
  for (const auto& p : parts) {
    if (p.data.rows() != parts.front().data.rows()) throw std::invalid_argument("concat_windows: window lengths differ");
    cols += p.data.cols();
  }
  SignalMatrix out{Matrix(parts.front().data.rows(), cols), parts.front().window_seconds};
  Index offset = 0;
  for (const auto& p : parts) {
    out.data.middleCols(offset, p.data.cols()) = p.data;
    offset += p.data.cols();
  }
  return out;
}

void validate_config(const SynthConfig& cfg) {
  if (cfg.n_appliances < 1) throw std::invalid_argument("synth: n_appliances must be >= 1");
  if (cfg.layer_widths.empty()) throw std::invalid_argument("synth: at least one layer required");
  for (Index w : cfg.layer_widths) {
    if (w < 1) throw std::invalid_argument("synth: layer widths must be >= 1");
  }
  if (cfg.window_length < 1) throw std::invalid_argument("synth: window length must be >= 1");
  if (cfg.windows < 1) throw std::invalid_argument("synth: windows must be >= 1");
  if (cfg.n_homes < 1) throw std::invalid_argument("synth: n_homes must be >= 1");
  if (cfg.test_windows < 0) throw std::invalid_argument("synth: test_windows must be >= 0");
  if (!(cfg.density > 0.0 && cfg.density <= 1.0)) throw std::invalid_argument("synth: density must lie in (0, 1]");
  if (!(cfg.dictionary_density > 0.0 && cfg.dictionary_density <= 1.0)) {
    throw std::invalid_argument("synth: dictionary density must lie in (0, 1]");
  }
  if (!(cfg.noise_std >= 0.0)) throw std::invalid_argument("synth: noise_std must be >= 0");
  if (cfg.sample_period < 1) throw std::invalid_argument("synth: sample period must be >= 1");
}

namespace {

Matrix sparse_nonneg_dictionary(Index rows, Index cols, double density, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<Index> any_row(0, rows - 1);
  Matrix d = Matrix::Zero(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      if (unit(rng) < density) d(i, j) = 0.1 + unit(rng);
    }
    if (d.col(j).isZero(0.0)) d(any_row(rng), j) = 1.0;
    d.col(j) /= d.col(j).norm();
  }
  return d;
}

Matrix sparse_nonneg_code(Index rows, Index cols, double density, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<Index> any_row(0, rows - 1);
  Matrix z = Matrix::Zero(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      if (unit(rng) < density) z(i, j) = 0.5 + unit(rng);
    }
    if (z.col(j).isZero(0.0)) z(any_row(rng), j) = 0.5 + unit(rng);
  }
  return z;
}

EnergySeries series_from_windows(const Matrix& windows, std::int64_t start, std::int64_t period,
                                 std::optional<std::string> id) {
  EnergySeries s;
  s.appliance_id = std::move(id);
  const auto n = static_cast<std::size_t>(windows.size());
  s.timestamps.reserve(n);
  s.values.reserve(n);
  for (Index j = 0; j < windows.cols(); ++j) {
    for (Index i = 0; i < windows.rows(); ++i) {
      s.timestamps.push_back(start + static_cast<std::int64_t>(s.values.size()) * period);
      s.values.push_back(windows(i, j));
    }
  }
  return s;
}

}  // namespace

SynthData synth_generate(const SynthConfig& cfg) {
  validate_config(cfg);
  constexpr std::int64_t kStart = 1'600'000'000;

  SynthData data;
  Rng model_rng = make_rng(cfg.seed, 0);
  for (std::size_t a = 0; a < cfg.n_appliances; ++a) {
    ApplianceModel model;
    model.appliance_id = "appliance_" + std::to_string(a);
    Index rows = cfg.window_length;
    std::vector<LayerDictionary> layers;
    for (Index width : cfg.layer_widths) {
      layers.push_back(LayerDictionary{sparse_nonneg_dictionary(rows, width, cfg.dictionary_density, model_rng), true});
      rows = width;
    }
    model.dictionary = DeepDictionary(std::move(layers));
    model.training_config.solver = "synthetic";
    model.training_config.seed = cfg.seed;
    data.models.push_back(std::move(model));
  }

  std::vector<Matrix> effective;
  for (const auto& model : data.models) effective.push_back(model.dictionary.chained_product());

  auto make_home = [&](const std::string& home_id, Index windows, std::uint64_t stream) {
    Rng rng = make_rng(cfg.seed, stream);
    std::normal_distribution<double> noise(0.0, cfg.noise_std);
    HomeDataset home;
    home.home_id = home_id;
    for (std::size_t a = 0; a < cfg.n_appliances; ++a) {
      const Matrix code = sparse_nonneg_code(cfg.layer_widths.back(), windows, cfg.density, rng);
      Matrix x = effective[a] * code;
      if (cfg.noise_std > 0.0) x = x.unaryExpr([&](double v) { return v + noise(rng); });
      x = x.cwiseMax(0.0);
      const auto& id = data.models[a].appliance_id;
      home.appliance_series.emplace(id, series_from_windows(x, kStart, cfg.sample_period, id));
    }
    home.aggregate_series = sum_series(home.appliance_series);
    return home;
  };

  for (std::size_t h = 0; h < cfg.n_homes; ++h) {
    data.homes.push_back(make_home("home_" + std::to_string(h), cfg.windows, 1 + h));
  }
  if (cfg.test_windows > 0) data.homes.push_back(make_home("test", cfg.test_windows, 1 + cfg.n_homes));
  return data;
}

}  // namespace deepdisagg
