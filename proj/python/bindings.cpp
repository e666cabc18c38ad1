#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "uadrive/bnn.hpp"
#include "uadrive/config.hpp"
#include "uadrive/error.hpp"
#include "uadrive/lidar.hpp"
#include "uadrive/pid.hpp"
#include "uadrive/rng.hpp"
#include "uadrive/simloop.hpp"
#include "uadrive/supervisor.hpp"
#include "uadrive/track.hpp"

namespace py = pybind11;
using namespace uadrive;

PYBIND11_MODULE(_uadrive, m) {
  m.doc() = "Uncertainty-gated lateral control workbench";

  py::register_exception<Error>(m, "UadriveError", PyExc_RuntimeError);

  m.def("builtin_track_names", &track::builtin_names);

  py::class_<track::Track>(m, "Track")
      .def_property_readonly("name", &track::Track::name)
      .def_property_readonly("width", &track::Track::width)
      .def_property_readonly("total_length", &track::Track::total_length)
      .def("project",
           [](const track::Track& t, double x, double y) {
             const auto p = t.project({x, y});
             return py::make_tuple(p.offset, p.s, p.tangent_heading);
           })
      .def("contains", [](const track::Track& t, double x, double y) { return t.contains({x, y}); })
      .def("ray_cast", [](const track::Track& t, double x, double y, double angle, double max_range) {
        return t.ray_cast({x, y}, unit_from_angle(angle), max_range);
      });

  m.def("compile_builtin", [](const std::string& name) {
    const auto spec = track::find_builtin(name);
    if (!spec) throw Error(ErrorCode::ConfigInvalid, "unknown track '" + name + "'");
    return track::compile_track(*spec);
  });

  m.def(
      "lidar_scan",
      [](const track::Track& t, double x, double y, double heading, int n_rays, double max_range) {
        lidar::LidarConfig cfg;
        cfg.n_rays = n_rays;
        cfg.max_range = max_range;
        return lidar::scan(t, {x, y, heading, 0.0}, cfg).distances;
      },
      py::arg("track"), py::arg("x"), py::arg("y"), py::arg("heading"), py::arg("n_rays") = 19,
      py::arg("max_range") = 100.0);

  py::enum_<supervisor::Authority>(m, "Authority")
      .value("Autonomous", supervisor::Authority::Autonomous)
      .value("Manual", supervisor::Authority::Manual);

  py::class_<supervisor::SupervisorConfig>(m, "SupervisorConfig")
      .def(py::init([](double threshold, int consecutive) {
             supervisor::SupervisorConfig c{threshold, consecutive};
             c.validate();
             return c;
           }),
           py::arg("cov_threshold") = 100.0, py::arg("required_consecutive") = 50)
      .def_readonly("cov_threshold", &supervisor::SupervisorConfig::cov_threshold)
      .def_readonly("required_consecutive", &supervisor::SupervisorConfig::required_consecutive);

  py::class_<supervisor::SupervisorState>(m, "SupervisorState")
      .def(py::init<>())
      .def_readonly("mode", &supervisor::SupervisorState::mode)
      .def_readonly("beyond_count", &supervisor::SupervisorState::beyond_count)
      .def_readonly("within_count", &supervisor::SupervisorState::within_count)
      .def_readonly("intervention_count", &supervisor::SupervisorState::intervention_count)
      .def_readonly("steps_in_manual", &supervisor::SupervisorState::steps_in_manual);

  m.def("supervisor_update", &supervisor::update, py::arg("state"), py::arg("cov"), py::arg("config"));

  m.def("signed_cov", &bnn::signed_cov, py::arg("mean"), py::arg("std"), py::arg("mu_floor") = bnn::kDefaultCovFloor);
  m.def(
      "summarize",
      [](std::vector<double> samples, double floor) {
        const auto p = bnn::summarize(std::move(samples), floor);
        py::dict d;
        d["mean"] = p.mean;
        d["std"] = p.std;
        d["cov"] = p.cov;
        d["odd_count"] = p.odd_count;
        return d;
      },
      py::arg("samples"), py::arg("mu_floor") = bnn::kDefaultCovFloor);
  m.def(
      "kl_to_prior",
      [](std::vector<double> mu, std::vector<double> rho, double prior_sigma) {
        return bnn::kl_to_prior({std::move(mu), std::move(rho)}, {prior_sigma});
      },
      py::arg("mu"), py::arg("rho"), py::arg("prior_sigma") = 1.0);
  m.def("softplus", &bnn::softplus);
  m.def("normal", [](std::uint64_t key, std::uint64_t index) { return rng::CounterRng(key).normal(index); });

  m.def(
      "run_pid_episode",
      [](const track::Track& t, double speed_mph, long max_steps) {
        sim::EpisodeConfig cfg;
        cfg.speed_mph = speed_mph;
        cfg.max_steps = max_steps;
        const auto r = sim::run_episode(t, cfg, {});
        py::dict d;
        d["outcome"] = sim::to_string(r.outcome);
        d["steps"] = r.steps;
        d["lap_time"] = r.lap_time;
        d["max_abs_offset"] = r.max_abs_offset;
        return d;
      },
      py::arg("track"), py::arg("speed_mph") = 60.0, py::arg("max_steps") = 0);

  m.def("config_canonical_text", [](const std::string& text) { return config::parse(text).canonical_text(); });
  m.def("config_digest", [](const std::string& text) { return config::parse(text).digest(); });
}
