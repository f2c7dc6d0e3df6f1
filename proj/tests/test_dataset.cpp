#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "test_util.hpp"
#include "windhybrid/dataset.hpp"

using namespace windhybrid;

namespace {

const char* kSmallCsv =
    "timestamp,turbine_id,wind_speed,pitch_angle,rotor_speed,temp_out,"
    "temp_nacelle,temp_rotor,vane_angle,wind_direction,power\n"
    "2015-01-01T00:00:00Z,WT01,8.0,0.05,1.6,12.0,27.0,32.0,0.01,3.14,745.25\n"
    "2015-01-01T00:10:00Z,WT02,,0.05,1.6,12.0,27.0,32.0,0.01,3.14,700.0\n"
    "2015-01-01T00:20:00Z,WT01,9.5,0.06,1.7,11.5,26.5,31.5,-0.02,3.10,1100.5\n"
    "2015-01-01T00:30:00Z,WT03,10.0,0.08,1.8,11.0,26.0,31.0,0.03,3.00,1300.75\n";

Dataset make_dataset(std::size_t n) {
  Dataset d;
  d.provenance = "unit";
  for (std::size_t i = 0; i < n; ++i) {
    TurbineRecord r;
    r.timestamp = 600 * static_cast<std::int64_t>(i);
    r.turbine_id = "WT01";
    r.v = 4.0 + 0.5 * static_cast<double>(i % 7);
    r.theta = 0.01 * static_cast<double>(i % 5);
    r.omega = 1.0 + 0.1 * static_cast<double>(i % 3);
    r.t_out = 10.0 + static_cast<double>(i % 11);
    r.t_nac = r.t_out + 15.0;
    r.t_rot = r.t_out + 20.0;
    r.alpha_v = 0.1;
    r.alpha_w = 1.0 + 0.01 * static_cast<double>(i);
    r.p = 100.0 * static_cast<double>(i % 13) + 5.0;
    d.records.push_back(r);
  }
  return d;
}

} // namespace

TEST_CASE("load_csv drops bad rows and keeps order") {
  TempDir tmp("load");
  write_text(tmp.file("data.csv"), kSmallCsv);

  LoadResult r = load_csv(tmp.file("data.csv"));
  CHECK(r.data.size() == 3);
  CHECK(r.dropped_count == 1);
  CHECK(r.data.records[0].turbine_id == "WT01");
  CHECK(r.data.records[0].p == doctest::Approx(745.25).epsilon(0));
  CHECK(r.data.records[1].v == doctest::Approx(9.5).epsilon(0));
  CHECK(r.data.records[2].timestamp_raw == "2015-01-01T00:30:00Z");
  // Ingested values equal the file contents exactly.
  CHECK(r.data.records[2].p == 1300.75);
}

TEST_CASE("load_csv detects semicolon delimiter") {
  TempDir tmp("semi");
  std::string csv = kSmallCsv;
  std::replace(csv.begin(), csv.end(), ',', ';');
  write_text(tmp.file("data.csv"), csv);
  LoadResult r = load_csv(tmp.file("data.csv"));
  CHECK(r.data.size() == 3);
}

TEST_CASE("load_csv error paths") {
  TempDir tmp("err");
  CHECK_THROWS_AS(load_csv(tmp.file("missing.csv")), DataError);

  write_text(tmp.file("nohdr.csv"),
             "timestamp,turbine_id,wind_speed\n2015-01-01T00:00:00Z,WT01,8.0\n");
  CHECK_THROWS_WITH_AS(load_csv(tmp.file("nohdr.csv")),
                       doctest::Contains("power"), DataError);

  write_text(tmp.file("allbad.csv"),
             "timestamp,turbine_id,wind_speed,pitch_angle,rotor_speed,temp_out,"
             "temp_nacelle,temp_rotor,vane_angle,wind_direction,power\n"
             "2015-01-01T00:00:00Z,WT01,nope,0,1,1,1,1,0,0,10\n");
  CHECK_THROWS_AS(load_csv(tmp.file("allbad.csv")), DataError);
}

TEST_CASE("load_csv rejects negative speeds and non-finite text") {
  TempDir tmp("neg");
  write_text(tmp.file("data.csv"),
             "timestamp,turbine_id,wind_speed,pitch_angle,rotor_speed,temp_out,"
             "temp_nacelle,temp_rotor,vane_angle,wind_direction,power\n"
             "2015-01-01T00:00:00Z,WT01,-1.0,0,1,1,1,1,0,0,10\n"
             "2015-01-01T00:10:00Z,WT01,5.0,0,-2,1,1,1,0,0,10\n"
             "2015-01-01T00:20:00Z,WT01,inf,0,1,1,1,1,0,0,10\n"
             "2015-01-01T00:30:00Z,WT01,5.0,0,1,1,1,1,0,0,10\n");
  LoadResult r = load_csv(tmp.file("data.csv"));
  CHECK(r.data.size() == 1);
  CHECK(r.dropped_count == 3);
}

TEST_CASE("csv round trip preserves fields") {
  TempDir tmp("round");
  Dataset d = make_dataset(50);
  for (auto& rec : d.records)
    rec.timestamp_raw = format_iso8601(rec.timestamp);
  write_csv(tmp.file("out.csv"), d);
  LoadResult r = load_csv(tmp.file("out.csv"));
  REQUIRE(r.data.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(r.data.records[i].v == d.records[i].v);
    CHECK(r.data.records[i].p == d.records[i].p);
    CHECK(r.data.records[i].timestamp == d.records[i].timestamp);
  }
}

TEST_CASE("iso8601 parsing") {
  CHECK(parse_iso8601("1970-01-01T00:00:00Z") == 0);
  CHECK(parse_iso8601("1970-01-02T00:00:00") == 86400);
  CHECK(parse_iso8601("2015-01-01T00:00:00Z") == 1420070400);
  CHECK(parse_iso8601("2015-01-01 01:00:00") == 1420070400 + 3600);
  CHECK(parse_iso8601("2015-01-01T01:00:00+01:00") == 1420070400);
  CHECK(parse_iso8601("2015-01-01T00:00:00-02:00") == 1420070400 + 7200);
  CHECK(format_iso8601(1420070400) == "2015-01-01T00:00:00Z");
  CHECK_THROWS_AS(parse_iso8601("not a date"), DataError);
  CHECK_THROWS_AS(parse_iso8601("2015-13-01T00:00:00Z"), DataError);
}

TEST_CASE("fit_normalization two-point example") {
  Dataset d;
  for (double value : {1.0, 3.0}) {
    TurbineRecord r;
    r.v = value;
    r.theta = 0.1 * value; // keep other selected features non-degenerate
    d.records.push_back(r);
  }
  auto stats = fit_normalization(d, std::array{FeatureId::v, FeatureId::theta});
  CHECK(stats.mean[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(stats.stddev[0] == doctest::Approx(1.0).epsilon(1e-15)); // divisor n
}

TEST_CASE("fit_normalization rejects constant features by name") {
  Dataset d = make_dataset(10);
  for (auto& r : d.records)
    r.alpha_v = 5.0;
  CHECK_THROWS_WITH_AS(
      fit_normalization(d, std::array{FeatureId::v, FeatureId::alpha_v}),
      doctest::Contains("alpha_v"), DataError);
}

TEST_CASE("standardization properties") {
  Dataset d = make_dataset(1000);
  auto stats = fit_normalization(d, std::array{FeatureId::v, FeatureId::p});

  double mean_z = 0;
  for (const auto& r : d.records)
    mean_z += stats.standardize(0, r.v);
  mean_z /= static_cast<double>(d.size());
  CHECK(std::fabs(mean_z) < 1e-12);

  // Round trip within 1e-10 relative.
  for (const auto& r : d.records) {
    double back = stats.destandardize(1, stats.standardize(1, r.p));
    CHECK(back == doctest::Approx(r.p).epsilon(1e-10));
  }
}

TEST_CASE("split partitions and reproduces exactly") {
  Dataset d = make_dataset(10);
  auto [a, b] = split(d, 0.8, 42);
  CHECK(a.size() == 8);
  CHECK(b.size() == 2);

  std::set<std::int64_t> seen;
  for (const auto& r : a.records)
    seen.insert(r.timestamp);
  for (const auto& r : b.records) {
    CHECK(seen.count(r.timestamp) == 0);
    seen.insert(r.timestamp);
  }
  CHECK(seen.size() == 10); // disjoint union = original

  auto [a2, b2] = split(d, 0.8, 42);
  REQUIRE(a2.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a2.records[i].timestamp == a.records[i].timestamp);

  auto [a3, b3] = split(d, 0.8, 43);
  bool same = a3.size() == a.size();
  if (same)
    for (std::size_t i = 0; i < a.size(); ++i)
      same = same && a3.records[i].timestamp == a.records[i].timestamp;
  CHECK_FALSE(same);
}

TEST_CASE("split rejects degenerate requests") {
  Dataset one = make_dataset(1);
  CHECK_THROWS_AS(split(one, 0.5, 1), DataError);
  Dataset d = make_dataset(10);
  CHECK_THROWS_AS(split(d, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(split(d, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(split(Dataset{}, 0.5, 1), DataError);
}
