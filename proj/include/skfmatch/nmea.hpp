#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace skfmatch {

enum class NmeaErrc {
  checksum_mismatch,
  malformed_framing,
  /// Well-formed sentence of a type this library does not decode. Callers may skip it.
  unknown_type,
  missing_error_fields,
  bad_field,
};

class NmeaError : public std::runtime_error {
 public:
  NmeaError(NmeaErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  NmeaErrc code() const noexcept { return code_; }

 private:
  NmeaErrc code_;
};

/// One validated `$TTSSS,f1,f2,...*hh` sentence.
struct NmeaSentence {
  std::string talker;  // e.g. "GP"
  std::string type;    // e.g. "GGA"
  std::vector<std::string> fields;
  std::uint8_t checksum = 0;
};

/// XOR of every byte of `body` (the text between '$' and '*').
std::uint8_t nmea_checksum(std::string_view body);

/// Parses and validates framing and checksum. Throws NmeaError; unknown_type is thrown
/// only after framing and checksum were found valid.
NmeaSentence parse_nmea(std::string_view line);

/// Builds a framed sentence with its checksum. No trailing CR/LF.
std::string emit_nmea(std::string_view talker, std::string_view type,
                      std::span<const std::string> fields);
std::string emit_nmea(const NmeaSentence& sentence);

bool is_supported_nmea_type(std::string_view type);

/// GGA position fix.
struct GgaFix {
  double utc_seconds = 0.0;  // seconds since midnight
  double lat = 0.0;          // degrees, north positive
  double lon = 0.0;          // degrees, east positive
  int quality = 0;           // 0 = invalid
  int satellites = 0;
  double hdop = 0.0;
  double altitude = 0.0;
};

/// GST pseudorange error statistics. Absent fields are empty optionals.
struct GstStats {
  double utc_seconds = 0.0;
  std::optional<double> rms;
  std::optional<double> sigma_major;
  std::optional<double> sigma_minor;
  std::optional<double> orientation_deg;  // of the major axis, clockwise from true north
  std::optional<double> sigma_lat;
  std::optional<double> sigma_lon;
  std::optional<double> sigma_alt;
};

GgaFix decode_gga(const NmeaSentence& s);
GstStats decode_gst(const NmeaSentence& s);
std::string format_gga(const GgaFix& fix, std::string_view talker = "GP");
std::string format_gst(const GstStats& stats, std::string_view talker = "GP");

/// Horizontal position covariance in (east, north) from a GST sentence. Uses the error
/// ellipse when present, otherwise the per-axis sigmas.
Eigen::Matrix2d gps_covariance(const NmeaSentence& gst);
Eigen::Matrix2d gps_covariance(const GstStats& gst);

}  // namespace skfmatch
