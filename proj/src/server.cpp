#include "sideseeing/server.hpp"

#include <atomic>
#include <map>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "sideseeing/dataset.hpp"
#include "sideseeing/error.hpp"
#include "sideseeing/geo.hpp"
#include "sideseeing/taxonomy.hpp"
#include "util.hpp"

namespace sideseeing {

using nlohmann::json;

void ServeConfig::validate() const {
  if (port < 0 || port > 65535) throw Error(ErrorCode::InvalidArgument, "port must be in [1, 65535]");
  if (!fs::is_directory(root)) throw Error(ErrorCode::RootMissing, root.string() + " is not a directory");
}

namespace {

const std::map<std::string, std::string>& bundle_files() {
  static const std::map<std::string, std::string> files = {
      {"instance.json", "application/json"},
      {"gps.geojson", "application/geo+json"},
      {"sensors.downsampled.json", "application/json"},
      {"annotations.json", "application/json"},
      {"video.mp4", "video/mp4"},
      {"waveform.csv", "text/csv"},
  };
  return files;
}

json findings_to_json(const ValidationReport& report) {
  json out = json::array();
  for (const auto& f : report) {
    out.push_back({{"severity", to_string(f.severity)}, {"code", f.code}, {"message", f.message}});
  }
  return out;
}

// Identifies the instance contents so a stale bundle is never served.
std::string content_hash(const fs::path& dir) {
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  std::uint64_t h = detail::kFnvOffset;
  for (const auto& p : paths) {
    const auto name = p.filename().string();
    if (name == files::kAnnotations || name.front() == '.') continue;
    h = detail::fnv1a(name + "\n", h);
    if (name == files::kVideo) {
      h = detail::fnv1a(std::to_string(fs::file_size(p)) + "\n", h);
    } else {
      h = detail::fnv1a(detail::read_file(p), h);
    }
  }
  return detail::to_hex(h);
}

}  // namespace

struct Server::Impl {
  ServeConfig config;
  DatasetIndex index;
  httplib::Server http;
  std::thread thread;
  std::atomic<int> bound_port{0};

  std::mutex locks_mutex;
  std::map<std::string, std::unique_ptr<std::mutex>> write_locks;
  std::mutex bundle_mutex;

  explicit Impl(ServeConfig c) : config(std::move(c)) {
    config.validate();
    index = scan_dataset(config.root);
    routes();
  }

  std::mutex& write_lock(const std::string& id) {
    std::lock_guard guard(locks_mutex);
    auto& slot = write_locks[id];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
  }

  static void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void fail(httplib::Response& res, int status, std::string_view code, const std::string& message) {
    reply(res, status, {{"error", code}, {"message", message}});
  }

  const DatasetEntry* entry_or_404(const httplib::Request& req, httplib::Response& res) {
    const auto id = req.path_params.at("id");
    const auto* e = index.find(id);
    if (!e) {
      fail(res, 404, "not_found", "unknown instance '" + id + "'");
      return nullptr;
    }
    if (!e->ok) {
      fail(res, 500, "instance_unreadable", e->error);
      return nullptr;
    }
    return e;
  }

  Instance metadata_only(const DatasetEntry& e) {
    Instance inst;
    inst.metadata = read_metadata_file(e.path / files::kMetadata);
    inst.metadata.instance_id = e.instance_id;
    inst.dir = e.path;
    return inst;
  }

  fs::path bundle_dir(const DatasetEntry& e) {
    std::lock_guard guard(bundle_mutex);
    const auto cache = config.root / kBundleCacheDir;
    const auto dir = cache / (e.instance_id + "-" + content_hash(e.path));
    if (fs::is_directory(dir)) return dir;
    fs::create_directories(cache);
    const auto tmp = cache / ("." + e.instance_id + ".building");
    std::error_code ec;
    fs::remove_all(tmp, ec);
    const auto inst = load_instance(e.path);
    BundleOptions options;
    options.media = config.media.available() ? &config.media : nullptr;
    options.waveform = options.media != nullptr;
    export_bundle(inst, tmp, options);
    fs::rename(tmp, dir);
    return dir;
  }

  void routes() {
    http.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
      res.set_header(std::string(kApiVersionHeader), std::string(kApiVersion));
    });
    http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const Error& e) {
        fail(res, 500, to_string(e.code()), e.what());
      } catch (const std::exception& e) {
        fail(res, 500, "internal", e.what());
      }
    });

    http.Get("/api/instances", [this](const httplib::Request&, httplib::Response& res) {
      json out = json::array();
      for (const auto& e : index.entries) {
        out.push_back({{"instance_id", e.instance_id},
                       {"city", e.city},
                       {"country", e.country},
                       {"status", e.ok ? "ok" : "error"},
                       {"error", e.error}});
      }
      reply(res, 200, {{"instances", out}, {"read_only", config.read_only}});
    });

    http.Get("/api/taxonomy", [](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, load_taxonomy().to_json());
    });

    http.Get("/api/instances/:id", [this](const httplib::Request& req, httplib::Response& res) {
      const auto* e = entry_or_404(req, res);
      if (!e) return;
      const auto inst = load_instance(e->path);
      json meta = metadata_to_json(inst.metadata);
      meta["instance_id"] = inst.metadata.instance_id;
      const auto* media = config.media.available() ? &config.media : nullptr;
      reply(res, 200,
            {{"instance_id", e->instance_id},
             {"metadata", meta},
             {"summary", to_json(summarize_instance(inst, media))},
             {"has_video", inst.video_path.has_value()}});
    });

    http.Get("/api/instances/:id/annotations", [this](const httplib::Request& req, httplib::Response& res) {
      const auto* e = entry_or_404(req, res);
      if (!e) return;
      const auto path = e->path / files::kAnnotations;
      res.status = 200;
      res.set_content(fs::is_regular_file(path) ? detail::read_file(path) : std::string("[]\n"),
                      "application/json");
    });

    http.Put("/api/instances/:id/annotations", [this](const httplib::Request& req, httplib::Response& res) {
      const auto* e = entry_or_404(req, res);
      if (!e) return;
      if (config.read_only) return fail(res, 403, "read_only", "server is read-only");
      json doc;
      try {
        doc = json::parse(req.body);
      } catch (const json::exception& ex) {
        return fail(res, 400, "malformed_json", ex.what());
      }
      std::vector<Annotation> anns;
      try {
        anns = annotations_from_json(doc);
      } catch (const Error& ex) {
        ValidationReport report{{Severity::Error, "schema", ex.what()}};
        return reply(res, 422, {{"error", "invalid_annotations"}, {"report", findings_to_json(report)}});
      }
      const auto inst = metadata_only(*e);
      const auto report = validate_annotations(anns, &inst, load_taxonomy());
      if (!passes(report)) {
        return reply(res, 422, {{"error", "invalid_annotations"}, {"report", findings_to_json(report)}});
      }
      {
        std::lock_guard guard(write_lock(e->instance_id));
        detail::write_file_atomic(e->path / files::kAnnotations, req.body);
      }
      reply(res, 200, {{"saved", anns.size()}});
    });

    http.Get("/api/instances/:id/bundle/:file", [this](const httplib::Request& req, httplib::Response& res) {
      const auto* e = entry_or_404(req, res);
      if (!e) return;
      const auto file = req.path_params.at("file");
      const auto it = bundle_files().find(file);
      if (it == bundle_files().end()) return fail(res, 404, "not_found", "no bundle file '" + file + "'");
      if (file == files::kAnnotations) {
        const auto path = e->path / files::kAnnotations;
        res.status = 200;
        res.set_content(fs::is_regular_file(path) ? detail::read_file(path) : std::string("[]\n"), it->second);
        return;
      }
      const auto path = bundle_dir(*e) / file;
      if (!fs::is_regular_file(path)) return fail(res, 404, "not_found", "bundle has no '" + file + "'");
      res.status = 200;
      res.set_content(detail::read_file(path), it->second);
    });
  }
};

Server::Server(ServeConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Server::~Server() { stop(); }

int Server::start() {
  auto& im = *impl_;
  int port = im.config.port;
  if (port == 0) {
    port = im.http.bind_to_any_port(im.config.host);
  } else if (!im.http.bind_to_port(im.config.host, port)) {
    port = -1;
  }
  if (port <= 0) throw Error(ErrorCode::IoFailure, "cannot bind " + im.config.host + ":" + std::to_string(im.config.port));
  im.bound_port = port;
  im.thread = std::thread([&im] { im.http.listen_after_bind(); });
  im.http.wait_until_ready();
  return port;
}

void Server::run() {
  auto& im = *impl_;
  int port = im.config.port;
  if (port == 0) {
    port = im.http.bind_to_any_port(im.config.host);
  } else if (!im.http.bind_to_port(im.config.host, port)) {
    port = -1;
  }
  if (port <= 0) throw Error(ErrorCode::IoFailure, "cannot bind " + im.config.host + ":" + std::to_string(im.config.port));
  im.bound_port = port;
  im.http.listen_after_bind();
}

void Server::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int Server::port() const { return impl_->bound_port; }

}  // namespace sideseeing
