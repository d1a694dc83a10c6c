#include "doctest.h"

#include "deepdisagg/data_pipeline.hpp"
#include "oracles.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

using namespace deepdisagg;

namespace {

HomeDataset parse(const std::string& text, CsvSchema schema = {}) {
  std::istringstream in(text);
  return parse_csv(in, schema, "h");
}

EnergySeries series(std::vector<double> values, std::int64_t period = 60) {
  EnergySeries s;
  for (std::size_t i = 0; i < values.size(); ++i) s.timestamps.push_back(static_cast<std::int64_t>(i) * period);
  s.values = std::move(values);
  return s;
}

std::string error_of(const std::string& text, CsvSchema schema = {}) {
  try {
    parse(text, schema);
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("csv with two appliances") {
  const auto home = parse("timestamp,fridge,kettle\n0,1.5,0\n60,2,100\n120,1.25,0\n");
  CHECK(home.home_id == "h");
  REQUIRE(home.appliance_series.size() == 2);
  const auto& fridge = home.appliance_series.at("fridge");
  CHECK(fridge.values == std::vector<double>{1.5, 2, 1.25});
  CHECK(fridge.timestamps == std::vector<std::int64_t>{0, 60, 120});
  CHECK(fridge.sampling_period() == 60);
  REQUIRE(home.aggregate_series);
  CHECK(home.aggregate_series->values == std::vector<double>{1.5, 102, 1.25});
}

TEST_CASE("csv aggregate column is kept, not synthesized") {
  const auto home = parse("timestamp,a,aggregate\n0,1,5\n10,2,6\n");
  CHECK(home.appliance_series.size() == 1);
  CHECK(home.aggregate_series->values == std::vector<double>{5, 6});
}

TEST_CASE("synthesized aggregate is the exact row sum") {
  std::ostringstream text;
  text << "timestamp,a,b,c\n";
  const Matrix v = oracle::random_matrix(50, 3, 7).cwiseAbs() * 1000.0;
  for (Index r = 0; r < 50; ++r) {
    text << r * 60;
    for (Index c = 0; c < 3; ++c) text << ',' << std::setprecision(17) << v(r, c);
    text << '\n';
  }
  const auto home = parse(text.str());
  for (Index r = 0; r < 50; ++r) {
    const double expected = (v(r, 0) + v(r, 1)) + v(r, 2);
    CHECK(home.aggregate_series->values[static_cast<std::size_t>(r)] == expected);
  }
}

TEST_CASE("duplicate timestamp names its line") {
  const auto msg = error_of("timestamp,a\n0,1\n60,2\n60,3\n");
  CHECK(msg.find("line 4") != std::string::npos);
  CHECK(msg.find("duplicate timestamp") != std::string::npos);
}

TEST_CASE("csv errors") {
  CHECK(error_of("time,a\n0,1\n").find("line 1") == 0);
  CHECK(error_of("timestamp,a\n0,1,2\n").find("line 2") == 0);
  CHECK(error_of("timestamp,a\n0,abc\n").find("line 2") == 0);
  CHECK(error_of("timestamp,a\n0,-1\n").find("negative") != std::string::npos);
  CsvSchema clamp;
  clamp.negative = NegativePolicy::clamp;
  CHECK(parse("timestamp,a\n0,-1\n", clamp).appliance_series.at("a").values == std::vector<double>{0});
  CsvSchema signed_values;
  signed_values.negative = NegativePolicy::allow;
  CHECK(parse("timestamp,a\n0,-1\n", signed_values).appliance_series.at("a").values == std::vector<double>{-1});
  CsvSchema strict;
  strict.sort_rows = false;
  CHECK(error_of("timestamp,a\n60,1\n0,2\n", strict).find("line 3") == 0);
  CHECK(parse("timestamp,a\n60,1\n0,2\n").appliance_series.at("a").values == std::vector<double>{2, 1});
}

TEST_CASE("missing values") {
  const std::string text = "timestamp,a,b\n0,1,2\n60,,3\n120,4,NaN\n180,5,6\n";
  const auto dropped = parse(text);
  CHECK(dropped.appliance_series.at("a").timestamps == std::vector<std::int64_t>{0, 180});
  CsvSchema zero;
  zero.missing = MissingPolicy::zero_fill;
  const auto filled = parse(text, zero);
  CHECK(filled.appliance_series.at("a").values == std::vector<double>{1, 0, 4, 5});
  CHECK(filled.appliance_series.at("b").values == std::vector<double>{2, 3, 0, 6});
}

TEST_CASE("csv write and reload is lossless") {
  auto home = parse("timestamp,a,b\n0,0.1,3\n60,0.30000000000000004,1e-300\n");
  std::ostringstream out;
  write_csv(out, home);
  const auto back = parse(out.str());
  CHECK(back.appliance_series.at("a").values == home.appliance_series.at("a").values);
  CHECK(back.appliance_series.at("b").values == home.appliance_series.at("b").values);
  CHECK(back.aggregate_series->values == home.aggregate_series->values);

  const auto dir = std::filesystem::temp_directory_path() / "deepdisagg_test_csv";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "house_7.csv");
    f << out.str();
  }
  CHECK(load_csv(dir / "house_7.csv").home_id == "house_7");
  std::filesystem::remove_all(dir);
}

TEST_CASE("resample_mean") {
  auto r = resample_mean(series({1, 2, 3, 4}), 120);
  CHECK(r.values == std::vector<double>{1.5, 3.5});
  CHECK(r.timestamps == std::vector<std::int64_t>{0, 120});
  CHECK(resample_mean(series({1, 2, 3, 4}), 60).values == std::vector<double>{1, 2, 3, 4});
  CHECK(resample_mean(series({1, 2, 3}), 120).values == std::vector<double>{1.5});
  CHECK_THROWS(resample_mean(series({1, 2, 3}), 90));
  auto uneven = series({1, 2, 3});
  uneven.timestamps[2] = 500;
  CHECK_THROWS(resample_mean(uneven, 120));
}

TEST_CASE("resampling preserves energy on whole windows") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix v = oracle::random_matrix(60, 1, seed).cwiseAbs();
    std::vector<double> values(v.data(), v.data() + 60);
    for (std::int64_t factor : {1, 2, 3, 4, 5, 6}) {
      const auto r = resample_mean(series(values, 10), 10 * factor);
      double before = 0.0;
      for (double x : values) before += x;
      double after = 0.0;
      for (double x : r.values) after += x * static_cast<double>(factor);
      CHECK(after == doctest::Approx(before).epsilon(1e-12));
    }
  }
}

TEST_CASE("split_homes") {
  std::vector<HomeDataset> homes(10);
  for (std::size_t i = 0; i < homes.size(); ++i) homes[i].home_id = "h" + std::to_string(i);
  auto split = split_homes(homes, 0.8, 1);
  CHECK(split.train.size() == 8);
  CHECK(split.test.size() == 2);

  std::vector<HomeDataset> five(homes.begin(), homes.begin() + 5);
  auto s5 = split_homes(five, 0.8, 1);
  CHECK(s5.train.size() == 4);
  CHECK(s5.test.size() == 1);

  auto again = split_homes(homes, 0.8, 1);
  for (std::size_t i = 0; i < 2; ++i) CHECK(again.test[i].home_id == split.test[i].home_id);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto s = split_homes(homes, 0.7, seed);
    std::set<std::string> ids;
    for (const auto& h : s.train) ids.insert(h.home_id);
    for (const auto& h : s.test) CHECK(ids.insert(h.home_id).second);
    CHECK(ids.size() == 10);
    CHECK(!s.test.empty());
    CHECK(!s.train.empty());
  }
  CHECK_THROWS(split_homes(std::vector<HomeDataset>(1), 0.8, 0));
}

TEST_CASE("windowize") {
  auto w = windowize(series({1, 2, 3, 4, 5, 6}), 3);
  CHECK(w.data.rows() == 3);
  CHECK(w.data.cols() == 2);
  CHECK(w.data(0, 1) == 4);
  CHECK(w.window_seconds == 180);
  CHECK(windowize(series({1, 2, 3, 4, 5, 6, 7}), 3).data.cols() == 2);
  CHECK(windowize(series({1, 2, 3}), 3).data.cols() == 1);
  CHECK_THROWS(windowize(series({1, 2}), 3));

  std::vector<double> values(40);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<double>(i * i) / 7.0;
  const auto win = windowize(series(values), 8);
  for (Index c = 0; c < win.data.cols(); ++c)
    for (Index r = 0; r < 8; ++r) CHECK(win.data(r, c) == values[static_cast<std::size_t>(c * 8 + r)]);

  const auto both = concat_windows({win, windowize(series({9, 9, 9, 9, 9, 9, 9, 9}), 8)});
  CHECK(both.data.cols() == 6);
  CHECK(both.data(0, 5) == 9);
}

TEST_CASE("synthetic generator") {
  SynthConfig cfg;
  cfg.n_appliances = 2;
  cfg.layer_widths = {8, 4};
  cfg.window_length = 16;
  cfg.windows = 20;
  cfg.seed = 4;
  const auto data = synth_generate(cfg);
  REQUIRE(data.homes.size() == 1);
  REQUIRE(data.models.size() == 2);
  const auto& home = data.homes[0];
  const auto& agg = home.aggregate_series->values;
  CHECK(agg.size() == 16 * 20);
  for (std::size_t t = 0; t < agg.size(); ++t) {
    double sum = 0.0;
    for (const auto& [id, s] : home.appliance_series) sum += s.values[t];
    CHECK(agg[t] == sum);
  }
  for (const auto& model : data.models) {
    CHECK(validate(model).empty());
    CHECK(model.dictionary.chained_product().minCoeff() >= 0.0);
  }

  const auto again = synth_generate(cfg);
  CHECK(again.homes[0].aggregate_series->values == agg);

  cfg.test_windows = 5;
  cfg.n_homes = 2;
  const auto more = synth_generate(cfg);
  CHECK(more.homes.size() == 3);
  CHECK(more.homes.back().home_id == "test");
}

TEST_CASE("dense synthetic windows lie in the model's column space") {
  SynthConfig cfg;
  cfg.n_appliances = 1;
  cfg.layer_widths = {10, 6};
  cfg.window_length = 24;
  cfg.windows = 30;
  cfg.density = 1.0;
  cfg.seed = 8;
  const auto data = synth_generate(cfg);
  const Matrix D = data.models[0].dictionary.chained_product();
  const auto& s = data.homes[0].appliance_series.begin()->second;
  const Matrix X = windowize(s, 24).data;
  const Matrix Z = D.completeOrthogonalDecomposition().solve(X);
  CHECK((X - D * Z).norm() <= 1e-8 * X.norm());
}
