#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "skfmatch/geo.hpp"
#include "skfmatch/matcher.hpp"
#include "skfmatch/motion.hpp"

namespace skfmatch {

/// Known starting pose of a log.
struct InitialPose {
  double time = 0.0;
  Pose pose;
  double sigma_xy = 1.0;
  double sigma_theta = 0.02;

  StateEstimate estimate() const;
};

/// One line of the sensor log: wheel increments plus the NMEA sentences received.
struct LogRecord {
  double time = 0.0;
  OdometryInput odometry;
  std::vector<std::string> nmea;
};

struct SensorLog {
  InitialPose init;
  std::vector<LogRecord> records;
};

class LogFormatError : public std::runtime_error {
 public:
  LogFormatError(std::size_t line, const std::string& what)
      : std::runtime_error("log line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

SensorLog read_sensor_log(std::istream& in);
SensorLog read_sensor_log_file(const std::string& path);
void write_sensor_log(std::ostream& out, const SensorLog& log);

/// Decodes the record's NMEA sentences. A GGA fix with quality > 0 and a GST sentence yield a
/// GPS fix; sentences failing their checksum or of unknown type are skipped.
SensorFrame frame_from_record(const LogRecord& record, const GeoReference& ref);
std::vector<SensorFrame> frames_from_log(const SensorLog& log, const GeoReference& ref);

}  // namespace skfmatch
