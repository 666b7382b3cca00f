#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>

#include "mvap/align.hpp"
#include "mvap/csv.hpp"
#include "mvap/rng.hpp"

using namespace mvap;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

// Exhaustive O(n*m) nearest-neighbor reference, same tie and tolerance rules.
struct OracleMatch {
  bool skipped;
  std::int64_t matched_ts;
  std::int64_t delta;
};

OracleMatch oracle_align(std::int64_t frame_ts,
                         const std::vector<AttitudeSample>& fdr,
                         std::int64_t tolerance) {
  std::int64_t best_delta = std::numeric_limits<std::int64_t>::max();
  std::int64_t best_ts = 0;
  for (const auto& s : fdr) {
    const std::int64_t d = std::llabs(frame_ts - s.timestamp_ms);
    if (d < best_delta) {  // strict <, so the earlier sample wins ties
      best_delta = d;
      best_ts = s.timestamp_ms;
    }
  }
  return {best_delta > tolerance, best_ts, best_delta};
}

}  // namespace

TEST_CASE("parse_fdr_csv accepts valid rows") {
  std::vector<std::string> lines = {
      "timestamp_ms,pitch_deg,roll_deg", "0,1.5,-2", "100,2,0.25", "250,-1,4"};
  const FdrLog log = parse_fdr_lines(lines, "test");
  REQUIRE(log.samples.size() == 3);
  CHECK(log.samples[1].timestamp_ms == 100);
  CHECK(log.samples[1].pitch_deg == doctest::Approx(2.0));
  CHECK(log.samples[2].roll_deg == doctest::Approx(4.0));
}

TEST_CASE("parse_fdr_csv rejects malformed input with line numbers") {
  CHECK_THROWS_WITH_AS(
      parse_fdr_lines({"nope"}, "f"),
      doctest::Contains("f:1"), ParseError);

  // Duplicate timestamp on line 5.
  std::vector<std::string> dup = {"timestamp_ms,pitch_deg,roll_deg", "0,0,0",
                                  "10,0,0", "20,0,0", "20,1,1"};
  CHECK_THROWS_WITH_AS(parse_fdr_lines(dup, "f"), doctest::Contains("f:5"),
                       ParseError);

  std::vector<std::string> bad_num = {"timestamp_ms,pitch_deg,roll_deg",
                                      "0,abc,0"};
  CHECK_THROWS_WITH_AS(parse_fdr_lines(bad_num, "f"), doctest::Contains("f:2"),
                       ParseError);

  std::vector<std::string> unsorted = {"timestamp_ms,pitch_deg,roll_deg",
                                       "100,0,0", "50,0,0"};
  CHECK_THROWS_WITH_AS(parse_fdr_lines(unsorted, "f"), doctest::Contains("f:3"),
                       ParseError);
}

TEST_CASE("fdr csv round-trip preserves values") {
  Rng rng(42);
  std::string csv = "timestamp_ms,pitch_deg,roll_deg\n";
  std::vector<AttitudeSample> expected;
  std::int64_t ts = 0;
  for (int i = 0; i < 10000; ++i) {
    ts += 1 + static_cast<std::int64_t>(rng.below(200));
    // Values that %.6g preserves exactly.
    const double pitch = std::floor(rng.uniform(-9000, 9000)) / 100.0;
    const double roll = std::floor(rng.uniform(-18000, 18000)) / 100.0;
    expected.push_back({ts, pitch, roll});
    char line[96];
    std::snprintf(line, sizeof(line), "%lld,%s,%s\n",
                  static_cast<long long>(ts), format_real(pitch).c_str(),
                  format_real(roll).c_str());
    csv += line;
  }
  const std::string path = temp_path("mvap_fdr_roundtrip.csv");
  write_text_file(path, csv);
  const FdrLog log = parse_fdr_csv(path);
  REQUIRE(log.samples.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(log.samples[i].timestamp_ms == expected[i].timestamp_ms);
    CHECK(log.samples[i].pitch_deg == expected[i].pitch_deg);
    CHECK(log.samples[i].roll_deg == expected[i].roll_deg);
  }
  std::filesystem::remove(path);
}

TEST_CASE("align worked examples") {
  FdrLog fdr;
  AlignmentConfig cfg;  // tolerance 100

  SUBCASE("nearest neighbor") {
    fdr.samples = {{990, 1, 0}, {1040, 2, 0}};
    FrameManifest frames{{{"a.ppm", "pilot_ws", 1000}}};
    const auto res = align(frames, fdr, cfg);
    REQUIRE(res.labeled.size() == 1);
    CHECK(res.labeled[0].matched_fdr_ts == 990);
    CHECK(res.labeled[0].pitch_deg == doctest::Approx(1.0));
  }

  SUBCASE("tie breaks toward the earlier sample") {
    fdr.samples = {{990, 1, 0}, {1010, 2, 0}};
    FrameManifest frames{{{"a.ppm", "pilot_ws", 1000}}};
    const auto res = align(frames, fdr, cfg);
    REQUIRE(res.labeled.size() == 1);
    CHECK(res.labeled[0].matched_fdr_ts == 990);
  }

  SUBCASE("out-of-tolerance frames are skipped and reported") {
    fdr.samples = {{4800, 1, 0}};
    FrameManifest frames{{{"late.ppm", "gauge", 5000}}};
    const auto res = align(frames, fdr, cfg);
    CHECK(res.labeled.empty());
    REQUIRE(res.skipped.size() == 1);
    CHECK(res.skipped[0].frame_path == "late.ppm");
    CHECK(res.skipped[0].nearest_delta_ms == 200);
  }

  SUBCASE("empty FDR log is an error") {
    FrameManifest frames{{{"a.ppm", "pilot_ws", 0}}};
    CHECK_THROWS_AS(align(frames, fdr, cfg), std::invalid_argument);
  }

  SUBCASE("labels come from classify_attitude of the matched sample") {
    fdr.samples = {{1000, 5.0, 0.0}};
    FrameManifest frames{{{"a.ppm", "pilot_ws", 1010}}};
    const auto res = align(frames, fdr, cfg);
    REQUIRE(res.labeled.size() == 1);
    CHECK(res.labeled[0].class_id == 0);  // NU
  }
}

TEST_CASE("align matches the O(n*m) oracle on random input") {
  // 10 Hz log over 100 s.
  FdrLog fdr;
  Rng rng(314);
  for (int i = 0; i < 1000; ++i)
    fdr.samples.push_back(
        {i * 100, rng.uniform(-10, 10), rng.uniform(-15, 15)});

  FrameManifest frames;
  for (int i = 0; i < 1000; ++i) {
    // Mix of in-range, boundary-tie (offset 50) and far-out timestamps.
    std::int64_t ts;
    const auto kind = rng.below(4);
    if (kind == 0)
      ts = static_cast<std::int64_t>(rng.below(100000));
    else if (kind == 1)
      ts = static_cast<std::int64_t>(rng.below(1000)) * 100 + 50;  // exact ties
    else if (kind == 2)
      ts = 100000 + static_cast<std::int64_t>(rng.below(5000));    // past the end
    else
      ts = static_cast<std::int64_t>(rng.below(1200)) * 100;       // exact hits
    frames.frames.push_back({"f" + std::to_string(i), "pilot_ws", ts});
  }

  AlignmentConfig cfg{40};
  const auto res = align(frames, fdr, cfg);
  CHECK(res.labeled.size() + res.skipped.size() == frames.frames.size());

  std::size_t li = 0, si = 0;
  for (const auto& frame : frames.frames) {
    const OracleMatch expect = oracle_align(frame.timestamp_ms, fdr.samples, 40);
    if (expect.skipped) {
      REQUIRE(si < res.skipped.size());
      CHECK(res.skipped[si].frame_path == frame.frame_path);
      CHECK(res.skipped[si].nearest_delta_ms == expect.delta);
      ++si;
    } else {
      REQUIRE(li < res.labeled.size());
      CHECK(res.labeled[li].frame.frame_path == frame.frame_path);
      CHECK(res.labeled[li].matched_fdr_ts == expect.matched_ts);
      ++li;
    }
  }
  CHECK(li == res.labeled.size());
  CHECK(si == res.skipped.size());
}

TEST_CASE("alignment properties") {
  FdrLog fdr;
  Rng rng(1001);
  for (int i = 0; i < 200; ++i)
    fdr.samples.push_back({i * 97, rng.uniform(-9, 9), rng.uniform(-9, 9)});

  FrameManifest frames;
  for (int i = 0; i < 300; ++i)
    frames.frames.push_back({"f" + std::to_string(i), "gauge",
                             static_cast<std::int64_t>(rng.below(25000))});

  AlignmentConfig cfg{60};
  const auto res = align(frames, fdr, cfg);

  SUBCASE("invariant under manifest reordering (set equality)") {
    FrameManifest reversed = frames;
    std::reverse(reversed.frames.begin(), reversed.frames.end());
    const auto res2 = align(reversed, fdr, cfg);
    auto key = [](const LabeledFrame& f) {
      return f.frame.frame_path + "@" + std::to_string(f.matched_fdr_ts);
    };
    std::set<std::string> a, b;
    for (const auto& f : res.labeled) a.insert(key(f));
    for (const auto& f : res2.labeled) b.insert(key(f));
    CHECK(a == b);
    CHECK(res.skipped.size() == res2.skipped.size());
  }

  SUBCASE("unbounded tolerance never skips; alignment is idempotent") {
    AlignmentConfig unbounded{std::numeric_limits<std::int64_t>::max()};
    const auto all = align(frames, fdr, unbounded);
    CHECK(all.skipped.empty());
    CHECK(all.labeled.size() == frames.frames.size());

    const auto again = align(frames, fdr, cfg);
    REQUIRE(again.labeled.size() == res.labeled.size());
    for (std::size_t i = 0; i < res.labeled.size(); ++i)
      CHECK(again.labeled[i].matched_fdr_ts == res.labeled[i].matched_fdr_ts);
  }
}

TEST_CASE("output csv shapes") {
  std::vector<LabeledFrame> labeled = {
      {{"a.ppm", "pilot_ws", 123}, 1.25, -2.5, 8, 120}};
  const std::string csv = labeled_manifest_csv(labeled);
  CHECK(csv ==
        "frame_path,view,timestamp_ms,pitch_deg,roll_deg,class_id,matched_fdr_ts\n"
        "a.ppm,pilot_ws,123,1.25,-2.5,8,120\n");

  const std::string skips = skip_report_csv({{"b.ppm", 512}});
  CHECK(skips == "frame_path,nearest_delta_ms\nb.ppm,512\n");
}
