#pragma once

#include <memory>
#include <string>

#include "sideseeing/instance.hpp"
#include "sideseeing/media.hpp"

namespace sideseeing {

inline constexpr std::string_view kApiVersion = "1";
inline constexpr std::string_view kApiVersionHeader = "X-SideSeeing-Api";
inline constexpr std::string_view kBundleCacheDir = ".bundle-cache";

struct ServeConfig {
  fs::path root;
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 binds an ephemeral port (tests)
  bool read_only = false;
  MediaTool media;  // used for bundle waveforms and frame counts; may be unavailable

  void validate() const;  // throws InvalidArgument / RootMissing
};

// HTTP backend for the annotation UI.
//
//   GET  /api/instances
//   GET  /api/instances/{id}
//   GET  /api/taxonomy
//   GET  /api/instances/{id}/annotations
//   PUT  /api/instances/{id}/annotations
//   GET  /api/instances/{id}/bundle/{file}
//
// PUT bodies are validated against the taxonomy and the instance span, then
// stored verbatim with an atomic replace; concurrent readers see either the
// previous or the new document.
class Server {
 public:
  explicit Server(ServeConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int start();
  // Binds and serves on the calling thread until stop().
  void run();
  void stop();
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sideseeing
