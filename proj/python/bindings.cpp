#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sideseeing/cli.hpp"
#include "sideseeing/dataset.hpp"
#include "sideseeing/error.hpp"
#include "sideseeing/geo.hpp"
#include "sideseeing/media.hpp"
#include "sideseeing/segmentation.hpp"
#include "sideseeing/snippet.hpp"
#include "sideseeing/taxonomy.hpp"

namespace py = pybind11;
using namespace sideseeing;
using nlohmann::json;

// Results cross the boundary as JSON text; the Python package decodes them.
namespace {

Profile profile_of(const std::string& name) {
  if (name == "lenient") return Profile::Lenient;
  if (name == "paper") return Profile::Paper;
  throw Error(ErrorCode::InvalidArgument, "unknown profile '" + name + "'");
}

json stream_counts(const Instance& inst) {
  json counts = json::object();
  for (const auto& [name, s] : inst.sensors3) counts[name] = s.size();
  for (const auto& [name, s] : inst.sensors1) counts[name] = s.size();
  for (const auto& [name, s] : inst.sensors_u3) counts[name] = s.size();
  counts["gps"] = inst.gps.size();
  counts["battery"] = inst.battery.size();
  return counts;
}

json report_json(const ValidationReport& report) {
  json findings = json::array();
  for (const auto& f : report)
    findings.push_back({{"severity", to_string(f.severity)}, {"code", f.code}, {"message", f.message}});
  return {{"passes", passes(report)}, {"findings", findings}};
}

std::string load(const std::string& dir) {
  const auto inst = load_instance(dir);
  return json{{"instance_id", inst.metadata.instance_id},
              {"metadata", metadata_to_json(inst.metadata)},
              {"counts", stream_counts(inst)},
              {"has_video", !inst.sensor_only()}}
      .dump();
}

std::string validate(const std::string& dir, const std::string& profile) {
  const auto p = profile_of(profile);
  try {
    return report_json(validate_instance(load_instance(dir), p)).dump();
  } catch (const Error& e) {
    return json{{"passes", false},
                {"findings", json::array({{{"severity", "error"}, {"code", to_string(e.code())}, {"message", e.what()}}})}}
        .dump();
  }
}

std::string summarize_one(const std::string& dir) {
  const auto media = MediaTool::from_environment();
  return to_json(summarize_instance(load_instance(dir), media.available() ? &media : nullptr)).dump();
}

std::string summarize(const std::string& root) {
  const auto index = scan_dataset(root);
  const auto media = MediaTool::from_environment();
  std::vector<InstanceSummary> rows;
  json errors = json::array();
  for (const auto& e : index.entries) {
    if (!e.ok) {
      errors.push_back({{"instance_id", e.instance_id}, {"error", e.error}});
      continue;
    }
    rows.push_back(summarize_instance(load_instance(e.path), media.available() ? &media : nullptr));
  }
  json cities = json::array();
  const auto per_city = summarize_cities(rows);
  for (const auto& c : per_city) cities.push_back(to_json(c));
  json doc = {{"cities", cities}, {"errors", errors}};
  doc["all"] = per_city.empty() ? json(nullptr) : to_json(aggregate_summaries(per_city));
  return doc.dump();
}

std::string segment(const std::string& dir, const std::string& params_json) {
  const auto params = params_json.empty() ? SegmentationParams{} : params_from_json(json::parse(params_json));
  const auto inst = load_instance(dir);
  json pauses = json::array(), segments = json::array(), turns = json::array();
  for (const auto& p : detect_pauses(inst, params)) pauses.push_back(to_json(p));
  for (const auto& s : split_by_pauses(inst, params)) segments.push_back(to_json(s));
  for (const auto& t : detect_turns(inst, params)) turns.push_back(to_json(t));
  return json{{"pauses", pauses}, {"segments", segments}, {"turns", turns}}.dump();
}

std::string synth(const std::string& out, std::uint64_t seed, int per_city, const std::string& config_json) {
  const auto config = config_json.empty() ? protocol_dataset_config(seed, per_city)
                                          : synth_config_from_json(json::parse(config_json));
  const auto media = MediaTool::from_environment();
  return to_json(generate_synthetic(config, out, media.available() ? &media : nullptr)).dump();
}

std::string snippet(const std::string& dir, std::int64_t start_ms, std::int64_t end_ms, const std::string& out,
                    bool cut_video) {
  const auto inst = load_instance(dir);
  const auto media = MediaTool::from_environment();
  SnippetOptions opts;
  opts.cut_video = cut_video;
  opts.media = media.available() ? &media : nullptr;
  const auto s = inst.metadata.start_epoch_ms;
  return extract_snippet(inst, s + start_ms, s + end_ms, out, opts).manifest.dump();
}

std::string bundle(const std::string& dir, const std::string& out, double downsample_hz, bool waveform) {
  const auto media = MediaTool::from_environment();
  BundleOptions opts;
  opts.downsample_hz = downsample_hz;
  opts.waveform = waveform;
  opts.media = media.available() ? &media : nullptr;
  return export_bundle(load_instance(dir), out, opts).string();
}

std::string geojson(const std::string& path) {
  if (fs::exists(fs::path(path) / files::kMetadata)) return to_geojson(load_instance(path)).dump();
  return to_geojson(scan_dataset(path)).dump();
}

py::tuple cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the sideseeing package";
  static py::exception<Error> error(m, "SideSeeingError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object cls = py::reinterpret_borrow<py::object>(error.ptr());
      py::object exc = cls(std::string(to_string(e.code())) + ": " + e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("load", &load, py::arg("dir"));
  m.def("validate", &validate, py::arg("dir"), py::arg("profile") = "lenient");
  m.def("summarize_instance", &summarize_one, py::arg("dir"));
  m.def("summarize", &summarize, py::arg("root"));
  m.def("segment", &segment, py::arg("dir"), py::arg("params_json") = "");
  m.def("taxonomy", [] { return load_taxonomy().to_json().dump(); });
  m.def("synth", &synth, py::arg("out"), py::arg("seed") = 1, py::arg("per_city") = 3, py::arg("config_json") = "");
  m.def("snippet", &snippet, py::arg("dir"), py::arg("start_ms"), py::arg("end_ms"), py::arg("out"),
        py::arg("cut_video") = true);
  m.def("bundle", &bundle, py::arg("dir"), py::arg("out"), py::arg("downsample_hz") = 10.0,
        py::arg("waveform") = false);
  m.def("geojson", &geojson, py::arg("path"));
  m.def("run_cli", &cli, py::arg("args"));
}
