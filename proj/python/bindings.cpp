#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "skfmatch/geo.hpp"
#include "skfmatch/matcher.hpp"
#include "skfmatch/nmea.hpp"
#include "skfmatch/results_io.hpp"
#include "skfmatch/road_map.hpp"
#include "skfmatch/sensor_log.hpp"
#include "skfmatch/simulator.hpp"

namespace py = pybind11;
using namespace skfmatch;

namespace {

template <class T, class Writer>
std::string to_text(const T& value, Writer write) {
  std::ostringstream out;
  write(out, value);
  return out.str();
}

template <class Reader>
auto from_text(const std::string& text, Reader read) {
  std::istringstream in(text);
  return read(in);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Road matching with a switching Kalman filter over a segment map.";

  py::register_exception<MapError>(m, "MapError", PyExc_ValueError);
  py::register_exception<LogFormatError>(m, "LogFormatError", PyExc_ValueError);
  py::register_exception<NmeaError>(m, "NmeaError", PyExc_ValueError);
  py::register_exception<FrameRejected>(m, "FrameRejected", PyExc_ValueError);

  py::class_<Pose>(m, "Pose")
      .def(py::init<>())
      .def(py::init([](double x, double y, double theta) { return Pose{x, y, theta}; }), py::arg("x"),
           py::arg("y"), py::arg("theta"))
      .def_readwrite("x", &Pose::x)
      .def_readwrite("y", &Pose::y)
      .def_readwrite("theta", &Pose::theta)
      .def("__eq__", [](const Pose& a, const Pose& b) { return a == b; })
      .def("__repr__", [](const Pose& p) {
        return "Pose(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ", " + std::to_string(p.theta) + ")";
      });

  py::class_<StateEstimate>(m, "StateEstimate")
      .def(py::init<>())
      .def(py::init([](const Pose& mean, const Eigen::Matrix3d& cov) { return StateEstimate{mean, cov}; }),
           py::arg("mean"), py::arg("cov"))
      .def_readwrite("mean", &StateEstimate::mean)
      .def_readwrite("cov", &StateEstimate::cov);

  py::class_<OdometryNoise>(m, "OdometryNoise")
      .def(py::init<>())
      .def_readwrite("sigma_s", &OdometryNoise::sigma_s)
      .def_readwrite("sigma_theta", &OdometryNoise::sigma_theta);

  py::class_<VehicleParams>(m, "VehicleParams")
      .def(py::init<>())
      .def_readwrite("track", &VehicleParams::track)
      .def_readwrite("odo_noise", &VehicleParams::odo_noise);

  m.def("advance_pose",
        [](const Pose& p, double ds, double dtheta) { return advance_pose(p, {ds, dtheta}); },
        py::arg("pose"), py::arg("delta_s"), py::arg("delta_theta"));
  m.def("predict",
        [](const StateEstimate& s, double ds, double dtheta, const VehicleParams& v) {
          return predict(s, {ds, dtheta}, v);
        },
        py::arg("state"), py::arg("delta_s"), py::arg("delta_theta"), py::arg("vehicle") = VehicleParams{});

  py::class_<Segment>(m, "Segment")
      .def_readonly("id", &Segment::id)
      .def_property_readonly("a", [](const Segment& s) { return std::make_pair(s.a.x, s.a.y); })
      .def_property_readonly("b", [](const Segment& s) { return std::make_pair(s.b.x, s.b.y); })
      .def_readonly("width", &Segment::width)
      .def_readonly("connected", &Segment::connected)
      .def_property_readonly("length", &Segment::length);

  py::class_<MapErrorModel>(m, "MapErrorModel")
      .def(py::init<>())
      .def_readwrite("absolute_error", &MapErrorModel::absolute_error)
      .def_readwrite("relative_error", &MapErrorModel::relative_error)
      .def_readwrite("containment_sigma", &MapErrorModel::containment_sigma);

  py::class_<RoadMap>(m, "RoadMap")
      .def_property_readonly("segments", &RoadMap::segments, py::return_value_policy::reference_internal)
      .def("segment", &RoadMap::segment, py::return_value_policy::reference_internal)
      .def_property_readonly("errors", &RoadMap::errors)
      .def_property_readonly("origin", [](const RoadMap& r) { return std::make_pair(r.origin().lat, r.origin().lon); })
      .def("__len__", &RoadMap::size)
      .def("to_text", [](const RoadMap& r) { return to_text(r, save_map); })
      .def("to_geojson", &map_to_geojson);
  m.def("load_map", [](const std::string& text) { return from_text(text, [](std::istream& in) { return load_map(in); }); },
        py::arg("text"), "Parses a map file's contents.");
  m.def("load_map_file", &load_map_file, py::arg("path"));

  py::class_<SensorLog>(m, "SensorLog")
      .def_property_readonly("size", [](const SensorLog& l) { return l.records.size(); })
      .def("to_text", [](const SensorLog& l) { return to_text(l, write_sensor_log); });
  m.def("read_sensor_log",
        [](const std::string& text) { return from_text(text, [](std::istream& in) { return read_sensor_log(in); }); },
        py::arg("text"));

  py::class_<TruthStep>(m, "TruthStep")
      .def_readonly("time", &TruthStep::time)
      .def_readonly("pose", &TruthStep::pose)
      .def_readonly("segment_id", &TruthStep::segment_id);

  py::class_<GroundTruth>(m, "GroundTruth")
      .def_readonly("initial", &GroundTruth::initial)
      .def_readonly("initial_segment", &GroundTruth::initial_segment)
      .def_readonly("steps", &GroundTruth::steps)
      .def("to_csv", [](const GroundTruth& t) { return to_text(t, write_truth_csv); });
  m.def("read_truth_csv",
        [](const std::string& text) { return from_text(text, [](std::istream& in) { return read_truth_csv(in); }); },
        py::arg("text"));

  py::class_<ScenarioWorld>(m, "ScenarioWorld")
      .def_readonly("map", &ScenarioWorld::map)
      .def_readonly("truth", &ScenarioWorld::truth)
      .def_readonly("fork_frame", &ScenarioWorld::fork_frame);

  m.def("simulate",
        [](const std::string& kind, std::uint64_t seed, const std::string& overrides_json) {
          Scenario s = overrides_json.empty()
                           ? Scenario::defaults(scenario_kind_from_string(kind))
                           : scenario_from_json(overrides_json);
          s.seed = seed;
          ScenarioWorld world = generate_scenario(s);
          SensorLog log = simulate_sensors(world.truth, s);
          return py::make_tuple(std::move(world), std::move(log));
        },
        py::arg("kind") = "straight", py::arg("seed") = 1, py::arg("scenario_json") = "",
        "Builds a scenario and its sensor log. Returns (world, log). A non-empty scenario_json "
        "replaces kind.");
  m.def("scenario_defaults_json",
        [](const std::string& kind) { return scenario_to_json(Scenario::defaults(scenario_kind_from_string(kind))); },
        py::arg("kind"));

  py::class_<SkfConfig>(m, "SkfConfig")
      .def(py::init<>())
      .def_readwrite("stay_probability", &SkfConfig::stay_probability)
      .def_readwrite("jump_epsilon", &SkfConfig::jump_epsilon)
      .def_readwrite("prune_threshold", &SkfConfig::prune_threshold);

  py::class_<MatcherConfig>(m, "MatcherConfig")
      .def(py::init<>())
      .def_readwrite("radius", &MatcherConfig::radius)
      .def_readwrite("skf", &MatcherConfig::skf)
      .def_readwrite("vehicle", &MatcherConfig::vehicle)
      .def_readwrite("map_errors", &MatcherConfig::map_errors);

  py::class_<HypothesisReport>(m, "HypothesisReport")
      .def_readonly("segment_id", &HypothesisReport::segment_id)
      .def_readonly("weight", &HypothesisReport::weight)
      .def_readonly("pose", &HypothesisReport::pose);

  py::class_<MatchResult>(m, "MatchResult")
      .def_readonly("step", &MatchResult::step)
      .def_readonly("time", &MatchResult::time)
      .def_readonly("best_segment", &MatchResult::best_segment)
      .def_readonly("best", &MatchResult::best)
      .def_readonly("best_weight", &MatchResult::best_weight)
      .def_readonly("hypotheses", &MatchResult::hypotheses)
      .def_readonly("gps_used", &MatchResult::gps_used)
      .def_readonly("candidate_count", &MatchResult::candidate_count)
      .def_readonly("off_road", &MatchResult::off_road)
      .def("weight_of", &MatchResult::weight_of, py::arg("segment_id"));

  m.def("run_matcher", &run_matcher, py::arg("map"), py::arg("log"), py::arg("config") = MatcherConfig{});
  m.def("results_to_csv", [](const std::vector<MatchResult>& r) { return to_text(r, write_results_csv); });
  m.def("track_to_geojson", &track_to_geojson, py::arg("map"), py::arg("results"));

  py::class_<DisambiguationEvent>(m, "DisambiguationEvent")
      .def_readonly("onset", &DisambiguationEvent::onset)
      .def_readonly("steps", &DisambiguationEvent::steps);

  py::class_<Metrics>(m, "Metrics")
      .def_readonly("correct_segment_rate", &Metrics::correct_segment_rate)
      .def_readonly("position_rmse", &Metrics::position_rmse)
      .def_readonly("final_position_error", &Metrics::final_position_error)
      .def_readonly("disambiguation", &Metrics::disambiguation)
      .def_readonly("nees", &Metrics::nees)
      .def_readonly("mean_nees", &Metrics::mean_nees);

  m.def("evaluate", &evaluate, py::arg("results"), py::arg("truth"));
  m.def("chi_square_band", &chi_square_band, py::arg("dof"), py::arg("confidence") = 0.95);

  py::class_<NmeaSentence>(m, "NmeaSentence")
      .def_readonly("talker", &NmeaSentence::talker)
      .def_readonly("type", &NmeaSentence::type)
      .def_readonly("fields", &NmeaSentence::fields)
      .def_readonly("checksum", &NmeaSentence::checksum);
  m.def("parse_nmea", &parse_nmea, py::arg("line"));
  m.def("emit_nmea",
        [](const std::string& talker, const std::string& type, const std::vector<std::string>& fields) {
          return emit_nmea(talker, type, fields);
        },
        py::arg("talker"), py::arg("type"), py::arg("fields"));
  m.def("nmea_checksum", &nmea_checksum, py::arg("body"));
}
