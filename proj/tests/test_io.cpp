#include <gtest/gtest.h>

#include <json.hpp>

#include <sstream>

#include "skfmatch/geo.hpp"
#include "skfmatch/results_io.hpp"
#include "skfmatch/simulator.hpp"

using namespace skfmatch;
using nlohmann::json;

namespace {

struct Fixture {
  ScenarioWorld world;
  SensorLog log;
  std::vector<MatchResult> results;
};

Fixture junction_run() {
  Scenario s = Scenario::defaults(ScenarioKind::junction);
  s.seed = 11;
  Fixture r{generate_scenario(s), {}, {}};
  r.log = simulate_sensors(r.world.truth, s);
  r.results = run_matcher(r.world.map, r.log, MatcherConfig{});
  return r;
}

}  // namespace

TEST(SensorLogIo, RoundTrip) {
  const Fixture r = junction_run();
  std::stringstream text;
  write_sensor_log(text, r.log);
  const SensorLog back = read_sensor_log(text);
  EXPECT_EQ(back.init.pose, r.log.init.pose);
  EXPECT_EQ(back.init.sigma_xy, r.log.init.sigma_xy);
  ASSERT_EQ(back.records.size(), r.log.records.size());
  for (std::size_t i = 0; i < back.records.size(); ++i) {
    EXPECT_EQ(back.records[i].time, r.log.records[i].time);
    EXPECT_EQ(back.records[i].odometry.d_left, r.log.records[i].odometry.d_left);
    EXPECT_EQ(back.records[i].odometry.d_right, r.log.records[i].odometry.d_right);
    EXPECT_EQ(back.records[i].nmea, r.log.records[i].nmea);
  }
}

TEST(SensorLogIo, Errors) {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      read_sensor_log(in);
    } catch (const LogFormatError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("1,1,1\n"), 1u);
  EXPECT_EQ(line_of("init,0,0,0,0,1,0.02\n1,1,1\n1,1,1\n"), 3u);
  EXPECT_EQ(line_of("# c\ninit,0,0,0,0,1,0.02\n1,x,1\n"), 3u);
  EXPECT_EQ(line_of("init,0,0,0,0,1,0.02\n1,1\n"), 2u);
}

TEST(SensorLogIo, CorruptSentenceIsSkipped) {
  const Fixture r = junction_run();
  LogRecord rec = r.log.records.front();
  ASSERT_EQ(rec.nmea.size(), 2u);
  const GeoReference ref = GeoReference::at(r.world.map.origin());
  EXPECT_TRUE(frame_from_record(rec, ref).gps);
  rec.nmea[0].back() = rec.nmea[0].back() == '0' ? '1' : '0';
  const SensorFrame f = frame_from_record(rec, ref);
  EXPECT_FALSE(f.gps);
  EXPECT_EQ(f.odometry.d_left, rec.odometry.d_left);
}

TEST(ResultsCsv, HeaderAndRoundTrip) {
  const Fixture r = junction_run();
  std::stringstream text;
  write_results_csv(text, r.results);
  std::string header;
  std::getline(text, header);
  EXPECT_EQ(header, kResultsHeader);
  text.seekg(0);
  const auto back = read_results_csv(text);
  ASSERT_EQ(back.size(), r.results.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].best_segment, r.results[i].best_segment);
    EXPECT_EQ(back[i].best.mean, r.results[i].best.mean);
    EXPECT_EQ(back[i].best.cov, r.results[i].best.cov);
    EXPECT_EQ(back[i].gps_used, r.results[i].gps_used);
    ASSERT_EQ(back[i].hypotheses.size(), r.results[i].hypotheses.size());
    for (std::size_t j = 0; j < back[i].hypotheses.size(); ++j) {
      EXPECT_EQ(back[i].hypotheses[j].segment_id, r.results[i].hypotheses[j].segment_id);
      EXPECT_EQ(back[i].hypotheses[j].weight, r.results[i].hypotheses[j].weight);
    }
  }
}

TEST(ResultsCsv, WeightsColumnSumsToOne) {
  const Fixture r = junction_run();
  std::stringstream text;
  write_results_csv(text, r.results);
  std::string line;
  std::getline(text, line);
  while (std::getline(text, line)) {
    std::vector<std::string> cols;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cols.push_back(c);
    ASSERT_EQ(cols.size(), 18u);
    double total = 0.0;
    std::stringstream hs(cols[9]);
    for (std::string pair; std::getline(hs, pair, ';');) total += std::stod(pair.substr(pair.find(':') + 1));
    EXPECT_NEAR(total, 1.0, 1e-9) << line;
  }
}

TEST(ResultsCsv, Errors) {
  std::istringstream wrong_header("step,time\n");
  EXPECT_THROW(read_results_csv(wrong_header), std::runtime_error);
  std::istringstream short_row(std::string(kResultsHeader) + "\n0,1,2\n");
  EXPECT_THROW(read_results_csv(short_row), std::runtime_error);
}

TEST(TruthCsv, RoundTrip) {
  const Fixture r = junction_run();
  std::stringstream text;
  write_truth_csv(text, r.world.truth);
  const GroundTruth back = read_truth_csv(text);
  EXPECT_EQ(back.initial, r.world.truth.initial);
  EXPECT_EQ(back.initial_segment, r.world.truth.initial_segment);
  ASSERT_EQ(back.steps.size(), r.world.truth.steps.size());
  for (std::size_t i = 0; i < back.steps.size(); ++i) {
    EXPECT_EQ(back.steps[i].pose, r.world.truth.steps[i].pose);
    EXPECT_EQ(back.steps[i].segment_id, r.world.truth.steps[i].segment_id);
    EXPECT_EQ(back.steps[i].time, r.world.truth.steps[i].time);
  }
}

TEST(GeoJson, TrackSchema) {
  const Fixture r = junction_run();
  const json doc = json::parse(track_to_geojson(r.world.map, r.results));
  ASSERT_EQ(doc.at("type"), "FeatureCollection");
  const json& features = doc.at("features");
  ASSERT_EQ(features.size(), r.results.size() + 1);
  EXPECT_EQ(features[0].at("geometry").at("type"), "LineString");
  EXPECT_EQ(features[0].at("geometry").at("coordinates").size(), r.results.size());
  const GeoReference ref = GeoReference::at(r.world.map.origin());
  for (std::size_t i = 0; i < r.results.size(); ++i) {
    const json& f = features[i + 1];
    ASSERT_EQ(f.at("type"), "Feature");
    ASSERT_EQ(f.at("geometry").at("type"), "Point");
    const json& c = f.at("geometry").at("coordinates");
    ASSERT_EQ(c.size(), 2u);
    const MapPoint p = latlon_to_map(c[1].get<double>(), c[0].get<double>(), ref);
    EXPECT_NEAR(p.x, r.results[i].best.mean.x, 1e-6);
    EXPECT_NEAR(p.y, r.results[i].best.mean.y, 1e-6);
    const json& props = f.at("properties");
    EXPECT_EQ(props.at("step").get<std::size_t>(), i);
    EXPECT_EQ(props.at("best_segment").get<SegmentId>(), r.results[i].best_segment);
    EXPECT_TRUE(props.at("gps_used").is_boolean());
    double total = 0.0;
    for (const auto& [id, w] : props.at("weights").items()) total += w.get<double>();
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(GeoJson, MapSchema) {
  const Fixture r = junction_run();
  const json doc = json::parse(map_to_geojson(r.world.map));
  ASSERT_EQ(doc.at("type"), "FeatureCollection");
  ASSERT_EQ(doc.at("features").size(), r.world.map.size());
  for (const json& f : doc.at("features")) {
    EXPECT_EQ(f.at("geometry").at("type"), "LineString");
    EXPECT_EQ(f.at("geometry").at("coordinates").size(), 2u);
    EXPECT_TRUE(f.at("properties").at("id").is_number_integer());
    EXPECT_GT(f.at("properties").at("width").get<double>(), 0.0);
  }
}
