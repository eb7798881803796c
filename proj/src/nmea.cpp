#include "skfmatch/nmea.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "skfmatch/angles.hpp"
#include "text_util.hpp"

namespace skfmatch {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

bool reserved(char c) {
  return c == '$' || c == '*' || c == ',' || c == '!' || c == '\r' || c == '\n' ||
         static_cast<unsigned char>(c) < 0x20 || static_cast<unsigned char>(c) > 0x7e;
}

std::optional<double> optional_number(const NmeaSentence& s, std::size_t index) {
  if (index >= s.fields.size() || s.fields[index].empty()) return std::nullopt;
  auto v = detail::parse_double(s.fields[index]);
  if (!v) {
    throw NmeaError(NmeaErrc::bad_field, s.type + " field " + std::to_string(index) + " '" +
                                             s.fields[index] + "' is not a number");
  }
  return v;
}

double required_number(const NmeaSentence& s, std::size_t index) {
  auto v = optional_number(s, index);
  if (!v) throw NmeaError(NmeaErrc::bad_field, s.type + " field " + std::to_string(index) + " empty");
  return *v;
}

double parse_utc(const NmeaSentence& s, std::size_t index) {
  const double v = required_number(s, index);
  const double hh = std::floor(v / 10000.0);
  const double mm = std::floor((v - hh * 10000.0) / 100.0);
  const double ss = v - hh * 10000.0 - mm * 100.0;
  return hh * 3600.0 + mm * 60.0 + ss;
}

/// ddmm.mmmm / dddmm.mmmm with hemisphere letter.
double parse_angle(const NmeaSentence& s, std::size_t index, char negative, char positive) {
  const double v = required_number(s, index);
  const double deg = std::floor(v / 100.0);
  double out = deg + (v - 100.0 * deg) / 60.0;
  const std::string& hemi = index + 1 < s.fields.size() ? s.fields[index + 1] : std::string();
  if (hemi.size() != 1 || (hemi[0] != negative && hemi[0] != positive)) {
    throw NmeaError(NmeaErrc::bad_field, s.type + ": bad hemisphere '" + hemi + "'");
  }
  return hemi[0] == negative ? -out : out;
}

std::string format_utc(double seconds) {
  long long cs = std::llround(seconds * 100.0) % 8640000LL;
  if (cs < 0) cs += 8640000LL;
  const long long hh = cs / 360000;
  const long long mm = (cs / 6000) % 60;
  const long long ss = cs % 6000;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02lld%02lld%02lld.%02lld", hh, mm, ss / 100, ss % 100);
  return buf;
}

std::string format_angle(double deg, int degree_digits) {
  constexpr long long kUnitsPerMinute = 100000000LL;  // 1e-8 minute resolution
  const long long units = std::llround(std::abs(deg) * 60.0 * kUnitsPerMinute);
  const long long whole_deg = units / (60 * kUnitsPerMinute);
  const long long rem = units % (60 * kUnitsPerMinute);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%0*lld%02lld.%08lld", degree_digits, whole_deg,
                rem / kUnitsPerMinute, rem % kUnitsPerMinute);
  return buf;
}

std::string format_opt(const std::optional<double>& v, const char* fmt) {
  if (!v) return {};
  char buf[48];
  std::snprintf(buf, sizeof buf, fmt, *v);
  return buf;
}

}  // namespace

std::uint8_t nmea_checksum(std::string_view body) {
  std::uint8_t sum = 0;
  for (char c : body) sum ^= static_cast<std::uint8_t>(c);
  return sum;
}

bool is_supported_nmea_type(std::string_view type) { return type == "GGA" || type == "GST"; }

NmeaSentence parse_nmea(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  if (line.size() < 4 || line.front() != '$') {
    throw NmeaError(NmeaErrc::malformed_framing, "sentence must start with '$'");
  }
  const auto star = line.find('*');
  if (star == std::string_view::npos || star + 3 != line.size()) {
    throw NmeaError(NmeaErrc::malformed_framing, "sentence must end with '*hh'");
  }
  const int hi = hex_value(line[star + 1]);
  const int lo = hex_value(line[star + 2]);
  if (hi < 0 || lo < 0) throw NmeaError(NmeaErrc::malformed_framing, "checksum is not hex");

  const std::string_view body = line.substr(1, star - 1);
  for (char c : body) {
    if (c != ',' && reserved(c)) {
      throw NmeaError(NmeaErrc::malformed_framing, "reserved character inside sentence");
    }
  }
  const auto expected = static_cast<std::uint8_t>(hi * 16 + lo);
  if (nmea_checksum(body) != expected) {
    throw NmeaError(NmeaErrc::checksum_mismatch, "checksum mismatch");
  }

  const auto parts = detail::split(body, ',');
  const std::string_view address = parts.front();
  if (address.size() != 5) {
    throw NmeaError(NmeaErrc::malformed_framing, "address field must be 5 characters");
  }

  NmeaSentence out;
  out.talker = std::string(address.substr(0, 2));
  out.type = std::string(address.substr(2));
  out.checksum = expected;
  out.fields.reserve(parts.size() - 1);
  for (std::size_t i = 1; i < parts.size(); ++i) out.fields.emplace_back(parts[i]);

  if (!is_supported_nmea_type(out.type)) {
    throw NmeaError(NmeaErrc::unknown_type, "unsupported sentence type " + out.type);
  }
  return out;
}

std::string emit_nmea(std::string_view talker, std::string_view type,
                      std::span<const std::string> fields) {
  if (talker.size() + type.size() != 5) {
    throw std::invalid_argument("NMEA address must be 5 characters");
  }
  std::string body;
  body.append(talker).append(type);
  for (const std::string& f : fields) {
    for (char c : f) {
      if (reserved(c)) throw std::invalid_argument("reserved character in NMEA field");
    }
    body.push_back(',');
    body.append(f);
  }
  char tail[4];
  std::snprintf(tail, sizeof tail, "*%02X", static_cast<unsigned>(nmea_checksum(body)));
  return "$" + body + tail;
}

std::string emit_nmea(const NmeaSentence& sentence) {
  return emit_nmea(sentence.talker, sentence.type, sentence.fields);
}

GgaFix decode_gga(const NmeaSentence& s) {
  if (s.type != "GGA") throw NmeaError(NmeaErrc::bad_field, "not a GGA sentence");
  GgaFix fix;
  fix.utc_seconds = parse_utc(s, 0);
  fix.quality = static_cast<int>(optional_number(s, 5).value_or(0.0));
  if (fix.quality == 0) return fix;  // no fix: position fields may be empty
  fix.lat = parse_angle(s, 1, 'S', 'N');
  fix.lon = parse_angle(s, 3, 'W', 'E');
  fix.satellites = static_cast<int>(optional_number(s, 6).value_or(0.0));
  fix.hdop = optional_number(s, 7).value_or(0.0);
  fix.altitude = optional_number(s, 8).value_or(0.0);
  return fix;
}

GstStats decode_gst(const NmeaSentence& s) {
  if (s.type != "GST") throw NmeaError(NmeaErrc::bad_field, "not a GST sentence");
  GstStats g;
  g.utc_seconds = parse_utc(s, 0);
  g.rms = optional_number(s, 1);
  g.sigma_major = optional_number(s, 2);
  g.sigma_minor = optional_number(s, 3);
  g.orientation_deg = optional_number(s, 4);
  g.sigma_lat = optional_number(s, 5);
  g.sigma_lon = optional_number(s, 6);
  g.sigma_alt = optional_number(s, 7);
  return g;
}

std::string format_gga(const GgaFix& fix, std::string_view talker) {
  char misc[64];
  std::snprintf(misc, sizeof misc, "%02d", fix.satellites);
  const std::string sats = misc;
  std::snprintf(misc, sizeof misc, "%.1f", fix.hdop);
  const std::string hdop = misc;
  std::snprintf(misc, sizeof misc, "%.2f", fix.altitude);
  const std::string alt = misc;
  const std::vector<std::string> fields = {
      format_utc(fix.utc_seconds), format_angle(fix.lat, 2), fix.lat < 0 ? "S" : "N",
      format_angle(fix.lon, 3),    fix.lon < 0 ? "W" : "E",  std::to_string(fix.quality),
      sats, hdop, alt, "M", "0.0", "M", "", ""};
  return emit_nmea(talker, "GGA", fields);
}

std::string format_gst(const GstStats& g, std::string_view talker) {
  const std::vector<std::string> fields = {
      format_utc(g.utc_seconds),         format_opt(g.rms, "%.3f"),
      format_opt(g.sigma_major, "%.3f"), format_opt(g.sigma_minor, "%.3f"),
      format_opt(g.orientation_deg, "%.1f"), format_opt(g.sigma_lat, "%.3f"),
      format_opt(g.sigma_lon, "%.3f"),   format_opt(g.sigma_alt, "%.3f")};
  return emit_nmea(talker, "GST", fields);
}

Eigen::Matrix2d gps_covariance(const GstStats& g) {
  if (g.sigma_major && g.sigma_minor && g.orientation_deg) {
    // Major axis direction in (east, north) for an azimuth measured clockwise from north.
    const double az = *g.orientation_deg * kPi / 180.0;
    const Eigen::Vector2d major(std::sin(az), std::cos(az));
    const Eigen::Vector2d minor(std::cos(az), -std::sin(az));
    const double a2 = *g.sigma_major * *g.sigma_major;
    const double b2 = *g.sigma_minor * *g.sigma_minor;
    Eigen::Matrix2d q = a2 * major * major.transpose() + b2 * minor * minor.transpose();
    return 0.5 * (q + q.transpose());
  }
  if (g.sigma_lat && g.sigma_lon) {
    return Eigen::Vector2d(*g.sigma_lon * *g.sigma_lon, *g.sigma_lat * *g.sigma_lat).asDiagonal();
  }
  throw NmeaError(NmeaErrc::missing_error_fields, "GST carries neither error ellipse nor sigmas");
}

Eigen::Matrix2d gps_covariance(const NmeaSentence& gst) { return gps_covariance(decode_gst(gst)); }

}  // namespace skfmatch
