#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <random>

#include "oracles.hpp"
#include "skfmatch/nmea.hpp"

using namespace skfmatch;

namespace {

const char* kGga =
    "$GPGGA,123519.00,4807.03800000,N,01131.00000000,E,1,08,0.9,545.40,M,46.9,M,,";

NmeaErrc code_of(std::string_view line) {
  try {
    parse_nmea(line);
  } catch (const NmeaError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for " << line;
  return NmeaErrc::bad_field;
}

std::string with_checksum(const std::string& unframed) {
  char tail[4];
  std::snprintf(tail, sizeof tail, "*%02X", oracle::xor_checksum(unframed.substr(1)));
  return unframed + tail;
}

std::string random_field(std::mt19937_64& rng) {
  static const std::string alphabet =
      "0123456789.-+ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz /:;=?@#%&()_";
  std::uniform_int_distribution<int> len(0, 12);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string f;
  for (int n = len(rng); n > 0; --n) f.push_back(alphabet[pick(rng)]);
  return f;
}

}  // namespace

TEST(NmeaChecksum, MatchesXorOracle) {
  const std::string s = with_checksum(kGga);
  const NmeaSentence parsed = parse_nmea(s);
  EXPECT_EQ(parsed.checksum, oracle::xor_checksum(std::string(kGga).substr(1)));
  EXPECT_EQ(nmea_checksum(std::string(kGga).substr(1)), parsed.checksum);
  EXPECT_EQ(emit_nmea(parsed), s);
}

TEST(ParseNmea, EmitterOutputParsesBack) {
  const std::string s = with_checksum(kGga);
  const NmeaSentence parsed = parse_nmea(s);
  EXPECT_EQ(parsed.talker, "GP");
  EXPECT_EQ(parsed.type, "GGA");
  ASSERT_EQ(parsed.fields.size(), 14u);
  EXPECT_EQ(parsed.fields[0], "123519.00");
  EXPECT_EQ(parsed.fields[13], "");
  EXPECT_EQ(parse_nmea(s + "\r\n").fields, parsed.fields);
}

TEST(ParseNmea, FlippedChecksumRejected) {
  std::string s = with_checksum(kGga);
  s.back() = s.back() == '0' ? '1' : '0';
  EXPECT_EQ(code_of(s), NmeaErrc::checksum_mismatch);
}

TEST(ParseNmea, FramingErrors) {
  EXPECT_EQ(code_of(""), NmeaErrc::malformed_framing);
  EXPECT_EQ(code_of("GPGGA,1*00"), NmeaErrc::malformed_framing);
  EXPECT_EQ(code_of("$GPGGA,1"), NmeaErrc::malformed_framing);
  EXPECT_EQ(code_of("$GPGGA,1*0G"), NmeaErrc::malformed_framing);
  EXPECT_EQ(code_of(with_checksum("$GPGG,1")), NmeaErrc::malformed_framing);
  EXPECT_EQ(code_of(with_checksum("$GPRMC,1,2")), NmeaErrc::unknown_type);
}

TEST(ParseNmea, FuzzedRoundTrip) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> nfields(0, 20);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int i = 0; i < 10000; ++i) {
    std::vector<std::string> fields(static_cast<std::size_t>(nfields(rng)));
    for (auto& f : fields) f = random_field(rng);
    const std::string type = coin(rng) ? "GGA" : "GST";
    const std::string talker = coin(rng) ? "GP" : "GN";
    const std::string line = emit_nmea(talker, type, fields);
    const NmeaSentence back = parse_nmea(line);
    ASSERT_EQ(back.talker, talker);
    ASSERT_EQ(back.type, type);
    ASSERT_EQ(back.fields, fields) << line;
    ASSERT_EQ(back.checksum, oracle::xor_checksum(line.substr(1, line.size() - 4)));
  }
}

TEST(ParseNmea, EveryCorruptedChecksumRejected) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> nfields(1, 15);
  for (int i = 0; i < 10000; ++i) {
    std::vector<std::string> fields(static_cast<std::size_t>(nfields(rng)));
    for (auto& f : fields) f = random_field(rng);
    std::string line = emit_nmea("GP", "GGA", fields);
    const std::uint8_t good = oracle::xor_checksum(line.substr(1, line.size() - 4));
    std::uint8_t bad = good;
    while (bad == good) bad = static_cast<std::uint8_t>(rng());
    char hex[3];
    std::snprintf(hex, sizeof hex, "%02X", static_cast<unsigned>(bad));
    line.replace(line.size() - 2, 2, hex);
    ASSERT_EQ(code_of(line), NmeaErrc::checksum_mismatch) << line;
  }
}

TEST(ParseNmea, CorruptedBodyRejected) {
  std::mt19937_64 rng(7);
  const std::string good = with_checksum(kGga);
  for (int i = 0; i < 2000; ++i) {
    std::string s = good;
    std::uniform_int_distribution<std::size_t> pos(1, s.size() - 4);
    const std::size_t p = pos(rng);
    char c = s[p];
    while (c == s[p] || c == '*' || c == '$') c = static_cast<char>(0x20 + rng() % 95);
    s[p] = c;
    EXPECT_THROW(parse_nmea(s), NmeaError) << s;
  }
}

TEST(Emit, RejectsReservedCharacters) {
  const std::vector<std::string> f{"a*b"};
  EXPECT_THROW(emit_nmea("GP", "GGA", f), std::invalid_argument);
  EXPECT_THROW(emit_nmea("GPX", "GGA", std::vector<std::string>{}), std::invalid_argument);
}

TEST(Gga, FormatDecodeRoundTrip) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> lat(-89.0, 89.0);
  std::uniform_real_distribution<double> lon(-179.9, 179.9);
  std::uniform_real_distribution<double> t(0.0, 86399.0);
  for (int i = 0; i < 2000; ++i) {
    GgaFix fix;
    fix.lat = lat(rng);
    fix.lon = lon(rng);
    fix.utc_seconds = std::round(t(rng) * 100.0) / 100.0;
    fix.quality = 2;
    fix.satellites = 9;
    fix.hdop = 0.9;
    fix.altitude = 50.0;
    const GgaFix back = decode_gga(parse_nmea(format_gga(fix)));
    // 1e-8 arc-minute resolution is about 2e-5 m on the ground.
    EXPECT_NEAR(back.lat, fix.lat, 1e-9);
    EXPECT_NEAR(back.lon, fix.lon, 1e-9);
    EXPECT_NEAR(back.utc_seconds, fix.utc_seconds, 1e-6);
    EXPECT_EQ(back.quality, 2);
    EXPECT_EQ(back.satellites, 9);
  }
}

TEST(Gga, BadFieldsReported) {
  try {
    decode_gga(parse_nmea(with_checksum("$GPGGA,123519,48x7.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,")));
    FAIL();
  } catch (const NmeaError& e) {
    EXPECT_EQ(e.code(), NmeaErrc::bad_field);
  }
}

TEST(GstCovariance, Isotropic) {
  for (double orient : {0.0, 17.0, 90.0, 233.5}) {
    GstStats g;
    g.sigma_major = 1.0;
    g.sigma_minor = 1.0;
    g.orientation_deg = orient;
    EXPECT_LT((gps_covariance(g) - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(GstCovariance, MajorAxisNorth) {
  GstStats g;
  g.sigma_major = 2.0;
  g.sigma_minor = 1.0;
  g.orientation_deg = 0.0;
  const Eigen::Matrix2d q = gps_covariance(g);
  EXPECT_NEAR(q(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(q(1, 1), 4.0, 1e-12);
  EXPECT_NEAR(q(0, 1), 0.0, 1e-12);
}

TEST(GstCovariance, MajorAxisEastAtNinetyDegrees) {
  GstStats g;
  g.sigma_major = 2.0;
  g.sigma_minor = 1.0;
  g.orientation_deg = 90.0;
  const Eigen::Matrix2d q = gps_covariance(g);
  EXPECT_NEAR(q(0, 0), 4.0, 1e-12);
  EXPECT_NEAR(q(1, 1), 1.0, 1e-12);
}

TEST(GstCovariance, ZeroSigmas) {
  GstStats g;
  g.sigma_major = 0.0;
  g.sigma_minor = 0.0;
  g.orientation_deg = 45.0;
  EXPECT_EQ(gps_covariance(g), Eigen::Matrix2d::Zero());
}

TEST(GstCovariance, EigenvaluesAreAxisVariances) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> sig(0.1, 10.0);
  std::uniform_real_distribution<double> az(0.0, 360.0);
  for (int i = 0; i < 500; ++i) {
    GstStats g;
    double a = sig(rng);
    double b = sig(rng);
    if (a < b) std::swap(a, b);
    g.sigma_major = a;
    g.sigma_minor = b;
    g.orientation_deg = az(rng);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(gps_covariance(g));
    EXPECT_NEAR(es.eigenvalues()(0), b * b, 1e-9 * a * a);
    EXPECT_NEAR(es.eigenvalues()(1), a * a, 1e-9 * a * a);
  }
}

TEST(GstCovariance, FallbackToAxisSigmas) {
  const NmeaSentence s = parse_nmea(with_checksum("$GPGST,000001.00,1.5,,,,2.0,3.0,4.0"));
  const Eigen::Matrix2d q = gps_covariance(s);
  EXPECT_DOUBLE_EQ(q(0, 0), 9.0);
  EXPECT_DOUBLE_EQ(q(1, 1), 4.0);
  EXPECT_EQ(q(0, 1), 0.0);
}

TEST(GstCovariance, MissingEverything) {
  const NmeaSentence s = parse_nmea(with_checksum("$GPGST,000001.00,1.5,,,,,,"));
  try {
    gps_covariance(s);
    FAIL();
  } catch (const NmeaError& e) {
    EXPECT_EQ(e.code(), NmeaErrc::missing_error_fields);
  }
}

TEST(Gst, FormatDecodeRoundTrip) {
  GstStats g;
  g.utc_seconds = 3600.5;
  g.rms = 1.25;
  g.sigma_major = 3.5;
  g.sigma_minor = 1.75;
  g.orientation_deg = 33.0;
  g.sigma_lat = 2.0;
  g.sigma_lon = 3.0;
  g.sigma_alt = 4.0;
  const GstStats back = decode_gst(parse_nmea(format_gst(g)));
  EXPECT_NEAR(back.utc_seconds, g.utc_seconds, 1e-6);
  EXPECT_DOUBLE_EQ(*back.sigma_major, 3.5);
  EXPECT_DOUBLE_EQ(*back.sigma_minor, 1.75);
  EXPECT_DOUBLE_EQ(*back.orientation_deg, 33.0);
  EXPECT_DOUBLE_EQ(*back.sigma_lat, 2.0);
  EXPECT_DOUBLE_EQ(*back.sigma_lon, 3.0);
}
