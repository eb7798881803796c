#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "skfmatch/road_map.hpp"

using namespace skfmatch;

namespace {

Segment seg(SegmentId id, double ax, double ay, double bx, double by, double width = 7.0) {
  return Segment{id, {ax, ay}, {bx, by}, width, {}};
}

// Minimum over a dense sampling of the segment, refined locally.
double sampled_distance(MapPoint p, const Segment& s) {
  double best = 1e300;
  double best_t = 0.0;
  const int n = 1000;
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const double d = std::hypot(s.a.x + t * (s.b.x - s.a.x) - p.x, s.a.y + t * (s.b.y - s.a.y) - p.y);
    if (d < best) {
      best = d;
      best_t = t;
    }
  }
  double lo = std::max(0.0, best_t - 1.0 / n);
  double hi = std::min(1.0, best_t + 1.0 / n);
  auto f = [&](double t) {
    return std::hypot(s.a.x + t * (s.b.x - s.a.x) - p.x, s.a.y + t * (s.b.y - s.a.y) - p.y);
  };
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (f(m1) < f(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return std::min(best, f(0.5 * (lo + hi)));
}

RoadMap random_map(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> coord(-300.0, 300.0);
  std::uniform_real_distribution<double> len(1.0, 120.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::vector<Segment> segs;
  for (int i = 0; i < n; ++i) {
    const double x = coord(rng);
    const double y = coord(rng);
    const double l = len(rng);
    const double a = ang(rng);
    segs.push_back(seg(i + 1, x, y, x + l * std::cos(a), y + l * std::sin(a)));
  }
  return RoadMap(std::move(segs));
}

std::vector<SegmentId> ids(const std::vector<const Segment*>& v) {
  std::vector<SegmentId> out;
  for (const auto* s : v) out.push_back(s->id);
  return out;
}

}  // namespace

TEST(SelectCandidates, OutOfRadius) {
  RoadMap map({seg(1, 0, 0, 10, 0)});
  EXPECT_TRUE(select_candidates(map, {5, 50}, 30.0).empty());
}

TEST(SelectCandidates, JustInsideDefaultRadius) {
  RoadMap map({seg(1, 0, 0, 10, 0)});
  EXPECT_EQ(ids(select_candidates(map, {5, 29.9}, 30.0)), std::vector<SegmentId>{1});
}

TEST(SelectCandidates, MatchesBruteForceOnRandomMaps) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> coord(-350.0, 350.0);
  std::uniform_real_distribution<double> radius(0.5, 90.0);
  for (int trial = 0; trial < 40; ++trial) {
    const RoadMap map = random_map(rng, 50);
    for (int q = 0; q < 50; ++q) {
      const MapPoint c{coord(rng), coord(rng)};
      const double r = radius(rng);
      std::vector<SegmentId> expected;
      for (const auto& s : map.segments()) {
        const double d = sampled_distance(c, s);
        // Skip queries sitting on the boundary, where sampling error could flip the verdict.
        if (std::abs(d - r) < 1e-6) continue;
        if (d <= r) expected.push_back(s.id);
      }
      std::vector<SegmentId> got = ids(select_candidates(map, c, r));
      std::sort(got.begin(), got.end());
      std::sort(expected.begin(), expected.end());
      ASSERT_EQ(got, expected) << "trial " << trial << " query " << q;
    }
  }
}

TEST(SelectCandidates, OrderedByDistanceThenId) {
  RoadMap map({seg(5, 0, 2, 10, 2), seg(3, 0, -2, 10, -2), seg(9, 0, 8, 10, 8)});
  EXPECT_EQ(ids(select_candidates(map, {5, 0}, 30.0)), (std::vector<SegmentId>{3, 5, 9}));
}

TEST(SelectCandidates, IndexIsSupersetOfHits) {
  std::mt19937_64 rng(7);
  const RoadMap map = random_map(rng, 50);
  std::uniform_real_distribution<double> coord(-300.0, 300.0);
  for (int q = 0; q < 200; ++q) {
    const MapPoint c{coord(rng), coord(rng)};
    const double r = 40.0;
    const auto hits = map.query_box({c.x - r, c.y - r}, {c.x + r, c.y + r});
    for (std::size_t i = 0; i < map.size(); ++i) {
      if (sampled_distance(c, map.segments()[i]) <= r - 1e-6) {
        EXPECT_NE(std::find(hits.begin(), hits.end(), i), hits.end());
      }
    }
  }
}

TEST(Projection, AxisAlignedFoot) {
  const Projection p = project_onto_segment({5, 3}, seg(1, 0, 0, 10, 0));
  EXPECT_DOUBLE_EQ(p.point.x, 5.0);
  EXPECT_DOUBLE_EQ(p.point.y, 0.0);
  EXPECT_DOUBLE_EQ(p.abscissa, 5.0);
  EXPECT_DOUBLE_EQ(p.distance, 3.0);
  EXPECT_FALSE(p.clamped);
}

TEST(Projection, ClampsToCloserEndpoint) {
  const Projection p = project_onto_segment({12, 3}, seg(1, 0, 0, 10, 0));
  EXPECT_DOUBLE_EQ(p.point.x, 10.0);
  EXPECT_DOUBLE_EQ(p.point.y, 0.0);
  EXPECT_DOUBLE_EQ(p.abscissa, 10.0);
  EXPECT_TRUE(p.clamped);
}

TEST(Projection, DiagonalSegment) {
  const Projection p = project_onto_segment({2, 0}, seg(1, 0, 0, 4, 4));
  // t = ((p - a).(b - a)) / |b - a|^2 = 8 / 32
  EXPECT_NEAR(p.point.x, 1.0, 1e-12);
  EXPECT_NEAR(p.point.y, 1.0, 1e-12);
  EXPECT_NEAR(p.abscissa, std::sqrt(2.0), 1e-12);
}

TEST(Projection, InvariantsAgainstDenseSampling) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 500; ++i) {
    const Segment s = seg(1, u(rng), u(rng), u(rng), u(rng));
    if (s.length() < 1e-3) continue;
    const MapPoint q{u(rng), u(rng)};
    const Projection p = project_onto_segment(q, s);
    EXPECT_GE(p.abscissa, 0.0);
    EXPECT_LE(p.abscissa, s.length());
    EXPECT_NEAR(p.distance, std::hypot(q.x - p.point.x, q.y - p.point.y), 1e-12);
    EXPECT_NEAR(p.distance, sampled_distance(q, s), 1e-7);
  }
}

TEST(SegmentHeading, CardinalAndGeneral) {
  EXPECT_DOUBLE_EQ(segment_heading(seg(1, 0, 0, 10, 0)), 0.0);
  EXPECT_DOUBLE_EQ(segment_heading(seg(1, 0, 0, 0, 5)), kPi / 2);
  EXPECT_NEAR(segment_heading(seg(1, 0, 0, 3, 4)), 0.9273, 1e-4);
  EXPECT_DOUBLE_EQ(segment_heading(seg(1, 0, 0, 3, 4)), std::atan2(4.0, 3.0));
}

TEST(CartoCovariance, HorizontalSegmentHasNoCrossTerm) {
  const MapErrorModel e;
  const Eigen::Matrix3d c = carto_covariance(seg(1, 0, 0, 100, 0, 6), e);
  const double along = (50.0 + 10.0) / 2.0;
  const double across = (3.0 + 1.0) / 2.0;
  EXPECT_NEAR(c(0, 0), along * along, 1e-9);
  EXPECT_NEAR(c(1, 1), across * across, 1e-9);
  EXPECT_NEAR(c(0, 1), 0.0, 1e-9);
  EXPECT_NEAR(c(2, 2), std::pow(std::atan2(2.0, 100.0), 2), 1e-15);
  EXPECT_EQ(c(0, 2), 0.0);
  EXPECT_EQ(c(1, 2), 0.0);
}

TEST(CartoCovariance, FortyFiveDegrees) {
  const MapErrorModel e;
  const double l = 100.0;
  const Eigen::Matrix3d c =
      carto_covariance(seg(1, 0, 0, l / std::sqrt(2.0), l / std::sqrt(2.0), 6), e);
  const double a2 = std::pow((l / 2 + 10.0) / 2.0, 2);
  const double c2 = std::pow((3.0 + 1.0) / 2.0, 2);
  EXPECT_NEAR(c(0, 0), (a2 + c2) / 2, 1e-9);
  EXPECT_NEAR(c(1, 1), (a2 + c2) / 2, 1e-9);
  EXPECT_NEAR(c(0, 1), (a2 - c2) / 2, 1e-9);
}

TEST(CartoCovariance, EigenvaluesAreRotationInvariant) {
  const MapErrorModel e{7.0, 0.5, 2.0};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  const double a2 = std::pow((40.0 + 7.0) / 2.0, 2);
  const double c2 = std::pow((2.5 + 0.5) / 2.0, 2);
  for (int i = 0; i < 100; ++i) {
    const double h = ang(rng);
    const Eigen::Matrix3d c = carto_covariance(seg(1, 0, 0, 80 * std::cos(h), 80 * std::sin(h), 5), e);
    EXPECT_NEAR((c - c.transpose()).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(c.topLeftCorner<2, 2>());
    EXPECT_NEAR(es.eigenvalues()(0), c2, 1e-9);
    EXPECT_NEAR(es.eigenvalues()(1), a2, 1e-9);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(c).eigenvalues().minCoeff(), 0.0);
  }
}

TEST(CartoCovariance, ReversedSegmentSameCovariance) {
  const MapErrorModel e;
  const Eigen::Matrix3d f = carto_covariance(seg(1, 0, 0, 30, 40), e);
  const Eigen::Matrix3d r = carto_covariance(seg(1, 30, 40, 0, 0), e);
  EXPECT_LT((f - r).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(CartoCovariance, DegenerateSegmentThrows) {
  Segment s = seg(1, 1, 1, 1, 1);
  EXPECT_THROW(carto_covariance(s, MapErrorModel{}), std::exception);
}

TEST(RoadMap, EmptyIsValid) {
  RoadMap map(std::vector<Segment>{});
  EXPECT_TRUE(map.empty());
  EXPECT_TRUE(select_candidates(map, {0, 0}, 30.0).empty());
}

TEST(RoadMap, SharedEndpointConnects) {
  RoadMap map({seg(1, 0, 0, 10, 0), seg(2, 10, 0, 20, 5), seg(3, 40, 0, 50, 0)});
  EXPECT_TRUE(map.segment(1).is_connected_to(2));
  EXPECT_TRUE(map.segment(2).is_connected_to(1));
  EXPECT_FALSE(map.segment(1).is_connected_to(3));
  EXPECT_FALSE(map.segment(1).is_connected_to(1));
}

TEST(RoadMap, RejectsInvalidInput) {
  EXPECT_THROW(RoadMap({seg(1, 0, 0, 0, 0)}), MapError);
  EXPECT_THROW(RoadMap({seg(1, 0, 0, 1, 0), seg(1, 2, 0, 3, 0)}), MapError);
  EXPECT_THROW(RoadMap({seg(1, 0, 0, 1, 0, 0.0)}), MapError);
  EXPECT_THROW(RoadMap({seg(1, 0, 0, NAN, 0)}), MapError);
  EXPECT_THROW(RoadMap({seg(kOffRoad, 0, 0, 1, 0)}), MapError);
  Segment a = seg(1, 0, 0, 1, 0);
  a.connected = {2};
  Segment b = seg(2, 5, 0, 6, 0);
  EXPECT_THROW(RoadMap({a, b}, {}, {}, RoadMap::Connectivity::given), MapError);
  a.connected = {9};
  EXPECT_THROW(RoadMap({a, b}, {}, {}, RoadMap::Connectivity::given), MapError);
}

TEST(MapIo, RoundTripIsBitExact) {
  std::mt19937_64 rng(5);
  RoadMap map = random_map(rng, 30);
  std::vector<Segment> segs = map.segments();
  // An explicit link that no shared endpoint implies.
  segs[0].connected.push_back(segs[1].id);
  segs[1].connected.push_back(segs[0].id);
  for (auto& s : segs) std::sort(s.connected.begin(), s.connected.end());
  map = RoadMap(segs, MapErrorModel{12.5, 0.75, 3.0}, MapOrigin{49.1234567891, 2.3456789123},
                RoadMap::Connectivity::given);

  std::stringstream text;
  save_map(text, map);
  const RoadMap back = load_map(text);
  ASSERT_EQ(back.size(), map.size());
  EXPECT_EQ(back.errors(), map.errors());
  EXPECT_EQ(back.origin(), map.origin());
  for (std::size_t i = 0; i < map.size(); ++i) {
    const Segment& x = map.segments()[i];
    const Segment& y = back.segments()[i];
    EXPECT_EQ(x.id, y.id);
    EXPECT_EQ(x.a, y.a);
    EXPECT_EQ(x.b, y.b);
    EXPECT_EQ(x.width, y.width);
    EXPECT_EQ(x.connected, y.connected);
  }
}

TEST(MapIo, ErrorsNameTheLine) {
  std::istringstream bad("segment 1 0 0 10 0 7\nsegment 2 10 0 20 0 seven\n");
  try {
    load_map(bad);
    FAIL();
  } catch (const MapError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  std::istringstream dangling("segment 1 0 0 10 0 7\nlink 1 4\n");
  try {
    load_map(dangling);
    FAIL();
  } catch (const MapError& e) {
    EXPECT_NE(std::string(e.what()).find("dangling"), std::string::npos);
  }
}

TEST(MapIo, GeoJsonHasOneFeaturePerSegment) {
  RoadMap map({seg(1, 0, 0, 10, 0), seg(2, 10, 0, 20, 5)}, {}, MapOrigin{49.0, 2.0});
  const std::string gj = map_to_geojson(map);
  EXPECT_NE(gj.find("FeatureCollection"), std::string::npos);
  std::size_t n = 0;
  for (std::size_t p = gj.find("LineString"); p != std::string::npos; p = gj.find("LineString", p + 1)) ++n;
  EXPECT_EQ(n, 2u);
}
