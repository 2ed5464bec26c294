#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "deidkit/annotation_store.hpp"

namespace httplib {
class Server;
}

namespace deidkit {

/// JSON API over an AnnotationStore:
///   GET  /samples?filter=&page=&page_size=
///   POST /samples/{key}/annotation   {"category": ..., "severity": ...}
///   GET  /export   (text/csv)
///   GET  /tally    (application/json)
/// Optionally serves static UI assets from a directory at "/".
class AnnotationServer {
 public:
  explicit AnnotationServer(AnnotationStore& store, std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~AnnotationServer();
  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port, or -1 on failure.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  bool run();
  void stop();
  void wait_until_ready() const;

 private:
  AnnotationStore& store_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace deidkit
