#include "sideseeing/cli.hpp"

#include <algorithm>

#include "CLI11.hpp"
#include "sideseeing/dataset.hpp"
#include "sideseeing/error.hpp"
#include "sideseeing/geo.hpp"
#include "sideseeing/segmentation.hpp"
#include "sideseeing/server.hpp"
#include "sideseeing/snippet.hpp"
#include "sideseeing/taxonomy.hpp"
#include "util.hpp"

namespace sideseeing {

using nlohmann::json;

namespace {

// Failures that stem from the caller's arguments rather than the data.
bool is_usage_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInterval:
    case ErrorCode::IntervalOutOfRange:
    case ErrorCode::InvalidArgument:
    case ErrorCode::RootMissing:
    case ErrorCode::TimeOutOfRange:
      return true;
    default:
      return false;
  }
}

void print_findings(const ValidationReport& report, std::ostream& out) {
  for (const auto& f : report) out << to_string(f.severity) << '\t' << f.code << '\t' << f.message << '\n';
}

json read_json_file(const fs::path& path) {
  try {
    return json::parse(detail::read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedJson, path.string() + ": " + e.what());
  }
}

const MediaTool* media_or_null(const MediaTool& media) { return media.available() ? &media : nullptr; }

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Toolkit for multimodal sidewalk recording instances", "sideseeing"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sideseeing 1.0.0");

  std::string dir, root, out_path, config_path, params_path, format = "csv", profile = "paper";
  bool flag_json = false, pauses = false, turns = false, no_video = false, read_only = false;
  bool require_video = false, waveform = false;
  std::int64_t start_ms = 0, end_ms = 0;
  int port = 8080, per_city = 3;
  std::uint64_t seed = 1;
  double downsample_hz = 10.0;
  std::string host = "127.0.0.1";

  auto* validate = app.add_subcommand("validate", "Check one instance directory");
  validate->add_option("dir", dir, "Instance directory")->required();
  validate->add_option("--profile", profile, "Rule set")->check(CLI::IsMember({"lenient", "paper"}));
  validate->add_flag("--json", flag_json, "Print the report as JSON");

  auto* summarize = app.add_subcommand("summarize", "Per-city dataset table");
  summarize->add_option("root", root, "Dataset root")->required();
  summarize->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json", "md"}));

  auto* segment = app.add_subcommand("segment", "Detect pauses and turns");
  segment->add_option("dir", dir, "Instance directory")->required();
  segment->add_flag("--pauses", pauses, "Report pauses");
  segment->add_flag("--turns", turns, "Report turns");
  segment->add_option("--params", params_path, "Segmentation parameters (JSON)");

  auto* snippet = app.add_subcommand("snippet", "Cut an interval into a new instance");
  snippet->add_option("dir", dir, "Instance directory")->required();
  snippet->add_option("--start", start_ms, "Start, ms from the instance start")->required();
  snippet->add_option("--end", end_ms, "End (exclusive), ms from the instance start")->required();
  snippet->add_option("--out", out_path, "Output directory")->required();
  snippet->add_flag("--no-video", no_video, "Skip the video cut");

  auto* geojson = app.add_subcommand("geojson", "Export GPS tracks as GeoJSON");
  geojson->add_option("path", dir, "Instance directory or dataset root")->required();
  geojson->add_option("--out", out_path, "Output file")->required();

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with ground truth");
  synth->add_option("--config", config_path, "Generator config (JSON); default: protocol routes");
  synth->add_option("--out", out_path, "Output root")->required();
  synth->add_option("--seed", seed, "First seed for the default config");
  synth->add_option("--per-city", per_city, "Routes per city for the default config")->check(CLI::Range(1, 99));
  synth->add_flag("--require-video", require_video, "Fail when no media tool is available");

  auto* bundle = app.add_subcommand("bundle", "Export an annotation bundle");
  bundle->add_option("dir", dir, "Instance directory")->required();
  bundle->add_option("--out", out_path, "Bundle directory")->required();
  bundle->add_option("--downsample-hz", downsample_hz, "Sensor trace rate")->check(CLI::PositiveNumber);
  bundle->add_flag("--waveform", waveform, "Include the audio envelope");

  auto* taxonomy = app.add_subcommand("taxonomy", "Print the sidewalk taxonomy");
  taxonomy->add_flag("--json", flag_json, "Print as JSON");

  auto* serve = app.add_subcommand("serve", "HTTP backend for the annotation UI");
  serve->add_option("root", root, "Dataset root")->required();
  serve->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));
  serve->add_option("--host", host, "Bind address");
  serve->add_flag("--read-only", read_only, "Reject annotation writes");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const MediaTool media = MediaTool::from_environment();

  try {
    if (*validate) {
      Instance inst;
      ValidationReport report;
      try {
        inst = load_instance(dir);
        report = validate_instance(inst, profile == "paper" ? Profile::Paper : Profile::Lenient);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::IoFailure && !fs::is_directory(dir)) throw;
        report.push_back({Severity::Error, std::string(to_string(e.code())), e.what()});
      }
      if (flag_json) {
        json items = json::array();
        for (const auto& f : report) {
          items.push_back({{"severity", to_string(f.severity)}, {"code", f.code}, {"message", f.message}});
        }
        out << json({{"instance", fs::path(dir).filename().string()}, {"passes", passes(report)}, {"findings", items}})
                   .dump(2)
            << '\n';
      } else {
        print_findings(report, out);
        out << (passes(report) ? "PASS" : "FAIL") << '\n';
      }
      return passes(report) ? kExitOk : kExitValidation;
    }

    if (*summarize) {
      const auto index = scan_dataset(root);
      std::vector<InstanceSummary> rows;
      int failures = 0;
      for (const auto& e : index.entries) {
        if (!e.ok) {
          err << "skipping " << e.instance_id << ": " << e.error << '\n';
          ++failures;
          continue;
        }
        try {
          rows.push_back(summarize_instance(load_instance(e.path), media_or_null(media)));
        } catch (const Error& ex) {
          err << "skipping " << e.instance_id << ": " << ex.what() << '\n';
          ++failures;
        }
      }
      const auto fmt = format == "json" ? TableFormat::Json : format == "md" ? TableFormat::Markdown : TableFormat::Csv;
      out << format_summary_table(summarize_cities(rows), fmt);
      return failures ? kExitValidation : kExitOk;
    }

    if (*segment) {
      SegmentationParams params;
      if (!params_path.empty()) params = params_from_json(read_json_file(params_path));
      params.validate();
      const auto inst = load_instance(dir);
      if (!pauses && !turns) pauses = turns = true;
      json doc = {{"instance_id", inst.metadata.instance_id}, {"params", to_json(params)}};
      if (pauses) {
        json items = json::array();
        for (const auto& p : detect_pauses(inst, params)) items.push_back(to_json(p));
        doc["pauses"] = items;
        json segs = json::array();
        for (const auto& s : split_by_pauses(inst, params)) segs.push_back(to_json(s));
        doc["segments"] = segs;
      }
      if (turns) {
        json items = json::array();
        for (const auto& t : detect_turns(inst, params)) items.push_back(to_json(t));
        doc["turns"] = items;
      }
      out << doc.dump(2) << '\n';
      return kExitOk;
    }

    if (*snippet) {
      if (end_ms <= start_ms) {
        err << "invalid interval: --end must be greater than --start\n";
        return kExitUsage;
      }
      const auto inst = load_instance(dir);
      SnippetOptions options;
      options.cut_video = !no_video;
      options.media = media_or_null(media);
      const auto t0 = inst.metadata.start_epoch_ms + start_ms;
      const auto t1 = inst.metadata.start_epoch_ms + end_ms;
      const auto snip = extract_snippet(inst, t0, t1, out_path, options);
      out << snip.manifest.dump(2) << '\n';
      return kExitOk;
    }

    if (*geojson) {
      json doc;
      if (fs::exists(fs::path(dir) / files::kMetadata)) {
        doc = to_geojson(load_instance(dir));
      } else {
        doc = to_geojson(scan_dataset(dir));
      }
      detail::write_file(out_path, doc.dump() + "\n");
      return kExitOk;
    }

    if (*synth) {
      SynthConfig config = config_path.empty() ? protocol_dataset_config(seed, per_city)
                                               : synth_config_from_json(read_json_file(config_path));
      config.require_video = config.require_video || require_video;
      const auto truth = generate_synthetic(config, out_path, media_or_null(media));
      out << "generated " << truth.instances.size() << " instance(s) under " << out_path << '\n';
      return kExitOk;
    }

    if (*bundle) {
      const auto inst = load_instance(dir);
      BundleOptions options;
      options.downsample_hz = downsample_hz;
      options.waveform = waveform;
      options.media = media_or_null(media);
      export_bundle(inst, out_path, options);
      out << out_path << '\n';
      return kExitOk;
    }

    if (*taxonomy) {
      const auto& tax = load_taxonomy();
      if (flag_json) {
        out << tax.to_json().dump(2) << '\n';
      } else {
        for (const auto& line : tax.lines()) out << line << '\n';
      }
      return kExitOk;
    }

    if (*serve) {
      ServeConfig config;
      config.root = root;
      config.port = port;
      config.host = host;
      config.read_only = read_only;
      config.media = media;
      Server server(std::move(config));
      err << "serving " << root << " on http://" << host << ':' << port << (read_only ? " (read-only)" : "") << '\n';
      server.run();
      return kExitOk;
    }
  } catch (const Error& e) {
    err << e.what() << '\n';
    return is_usage_error(e.code()) ? kExitUsage : kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitUsage;
}

}  // namespace sideseeing
