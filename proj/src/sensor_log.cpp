#include "skfmatch/sensor_log.hpp"

#include <fstream>
#include <istream>
#include <optional>
#include <ostream>

#include "skfmatch/nmea.hpp"
#include "text_util.hpp"

namespace skfmatch {

using detail::format_double;

StateEstimate InitialPose::estimate() const {
  StateEstimate e;
  e.mean = pose;
  e.cov = Eigen::Vector3d(sigma_xy * sigma_xy, sigma_xy * sigma_xy, sigma_theta * sigma_theta)
              .asDiagonal();
  return e;
}

namespace {

double number(std::string_view tok, std::size_t line, const char* field) {
  auto v = detail::parse_double(detail::trim(tok));
  if (!v) throw LogFormatError(line, std::string("bad ") + field + " '" + std::string(tok) + "'");
  return *v;
}

}  // namespace

SensorLog read_sensor_log(std::istream& in) {
  SensorLog log;
  bool have_init = false;
  std::optional<double> last_time;
  std::string raw;
  std::size_t line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;

    if (line.starts_with("init")) {
      const auto f = detail::split(line, ',');
      if (f.size() != 7 || detail::trim(f[0]) != "init") {
        throw LogFormatError(line_no, "init expects: init,t,x,y,theta,sigma_xy,sigma_theta");
      }
      if (have_init || !log.records.empty()) throw LogFormatError(line_no, "misplaced init record");
      log.init.time = number(f[1], line_no, "time");
      log.init.pose = {number(f[2], line_no, "x"), number(f[3], line_no, "y"),
                       number(f[4], line_no, "theta")};
      log.init.sigma_xy = number(f[5], line_no, "sigma_xy");
      log.init.sigma_theta = number(f[6], line_no, "sigma_theta");
      if (!(log.init.sigma_xy >= 0.0) || !(log.init.sigma_theta >= 0.0)) {
        throw LogFormatError(line_no, "init sigmas must be >= 0");
      }
      have_init = true;
      last_time = log.init.time;
      continue;
    }

    const auto dollar = line.find('$');
    std::string_view head = line.substr(0, dollar);
    head = detail::trim(head);
    if (dollar != std::string_view::npos) {
      if (head.empty() || head.back() != ',') {
        throw LogFormatError(line_no, "expected ',' before NMEA sentences");
      }
      head.remove_suffix(1);
    }
    const auto f = detail::split(head, ',');
    if (f.size() != 3) throw LogFormatError(line_no, "expected t,d_left,d_right");

    LogRecord rec;
    rec.time = number(f[0], line_no, "time");
    rec.odometry = {number(f[1], line_no, "d_left"), number(f[2], line_no, "d_right")};
    if (last_time && !(rec.time > *last_time)) {
      throw LogFormatError(line_no, "time does not increase");
    }
    last_time = rec.time;

    std::size_t pos = dollar;
    while (pos != std::string_view::npos) {
      const auto star = line.find('*', pos);
      if (star == std::string_view::npos || star + 3 > line.size()) {
        throw LogFormatError(line_no, "unterminated NMEA sentence");
      }
      rec.nmea.emplace_back(line.substr(pos, star + 3 - pos));
      pos = star + 3;
      if (pos == line.size()) break;
      if (line[pos] != ',' || pos + 1 >= line.size() || line[pos + 1] != '$') {
        throw LogFormatError(line_no, "expected ',$' between NMEA sentences");
      }
      ++pos;
    }
    log.records.push_back(std::move(rec));
  }
  if (!have_init) throw LogFormatError(line_no, "missing init record");
  return log;
}

SensorLog read_sensor_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sensor log " + path);
  return read_sensor_log(in);
}

void write_sensor_log(std::ostream& out, const SensorLog& log) {
  out << "# skfmatch sensor log v1\n";
  out << "# init,t,x,y,theta,sigma_xy,sigma_theta then t,d_left,d_right[,NMEA...]\n";
  const InitialPose& i = log.init;
  out << "init," << format_double(i.time) << ',' << format_double(i.pose.x) << ','
      << format_double(i.pose.y) << ',' << format_double(i.pose.theta) << ','
      << format_double(i.sigma_xy) << ',' << format_double(i.sigma_theta) << '\n';
  for (const LogRecord& r : log.records) {
    out << format_double(r.time) << ',' << format_double(r.odometry.d_left) << ','
        << format_double(r.odometry.d_right);
    for (const std::string& s : r.nmea) out << ',' << s;
    out << '\n';
  }
}

SensorFrame frame_from_record(const LogRecord& record, const GeoReference& ref) {
  SensorFrame frame;
  frame.time = record.time;
  frame.odometry = record.odometry;

  std::optional<GgaFix> gga;
  std::optional<GstStats> gst;
  for (const std::string& text : record.nmea) {
    try {
      const NmeaSentence s = parse_nmea(text);
      if (s.type == "GGA") gga = decode_gga(s);
      if (s.type == "GST") gst = decode_gst(s);
    } catch (const NmeaError& e) {
      if (e.code() == NmeaErrc::bad_field) throw;
      // Corrupted or unsupported sentences are dropped, as a receiver driver would.
    }
  }
  if (gga && gga->quality > 0 && gst) {
    try {
      frame.gps = make_gps_fix(*gga, *gst, ref, record.time);
    } catch (const NmeaError& e) {
      if (e.code() != NmeaErrc::missing_error_fields) throw;
    }
  }
  return frame;
}

std::vector<SensorFrame> frames_from_log(const SensorLog& log, const GeoReference& ref) {
  std::vector<SensorFrame> frames;
  frames.reserve(log.records.size());
  for (const LogRecord& r : log.records) frames.push_back(frame_from_record(r, ref));
  return frames;
}

}  // namespace skfmatch
