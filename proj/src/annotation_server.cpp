#include "deidkit/annotation_server.hpp"

#include <httplib.h>

#include "deidkit/errors.hpp"

namespace deidkit {

using nlohmann::json;

namespace {

void send_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", message}}.dump(), "application/json");
}

std::size_t parse_size(const httplib::Request& req, const char* name, std::size_t fallback) {
  if (!req.has_param(name)) return fallback;
  const std::string v = req.get_param_value(name);
  if (v.empty() || !std::all_of(v.begin(), v.end(), [](char c) { return c >= '0' && c <= '9'; }) || v.size() > 9) {
    throw RangeError(std::string(name) + " must be a non-negative integer");
  }
  return std::stoull(v);
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const NotFoundError& e) {
    send_error(res, 404, e.what());
  } catch (const RangeError& e) {
    send_error(res, 400, e.what());
  } catch (const ValidationError& e) {
    send_error(res, 422, e.what());
  } catch (const InputError& e) {
    send_error(res, 400, e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, std::string("bad JSON: ") + e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

}  // namespace

AnnotationServer::AnnotationServer(AnnotationStore& store, std::optional<std::filesystem::path> static_dir)
    : store_(store), server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;

  srv.Get("/samples", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const SampleFilter filter = SampleFilter::parse(req.has_param("filter") ? req.get_param_value("filter") : "all");
      const SamplePage page = store_.list(filter, parse_size(req, "page", 1), parse_size(req, "page_size", 50));
      json items = json::array();
      for (const auto& s : page.items) items.push_back(stored_sample_to_json(s));
      res.set_content(json{{"page", page.page},
                           {"page_size", page.page_size},
                           {"total_matching", page.total_matching},
                           {"total", page.total},
                           {"annotated", page.annotated},
                           {"items", items}}
                          .dump(),
                      "application/json");
    });
  });

  srv.Post(R"(/samples/(.+)/annotation)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string raw_key = req.matches[1].str();
      const auto key = SampleKey::parse(raw_key);
      if (!key) throw NotFoundError("malformed sample key '" + raw_key + "'");
      const json body = json::parse(req.body);
      const std::string cat_text = body.at("category").get<std::string>();
      const auto category = parse_fp_category(cat_text);
      if (!category) throw ValidationError("unknown category '" + cat_text + "'");
      Severity severity = Severity::NotApplicable;
      if (body.contains("severity") && !body["severity"].is_null()) {
        const std::string sev_text = body["severity"].get<std::string>();
        const auto parsed = parse_severity(sev_text);
        if (!parsed) throw ValidationError("unknown severity '" + sev_text + "'");
        severity = *parsed;
      }
      const StoredSample updated = store_.annotate(*key, *category, severity);
      json out = stored_sample_to_json(updated);
      if (body.contains("version") && body["version"].is_number_unsigned()) {
        out["overwrote_newer"] = body["version"].get<std::uint64_t>() + 1 != updated.version;
      }
      res.set_content(out.dump(), "application/json");
    });
  });

  srv.Get("/export", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { res.set_content(store_.export_csv(), "text/csv; charset=utf-8"); });
  });

  srv.Get("/tally", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { res.set_content(tally_to_json(store_.tally()).dump(), "application/json"); });
  });

  if (static_dir) srv.set_mount_point("/", static_dir->string());
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool AnnotationServer::run() { return server_->listen_after_bind(); }

void AnnotationServer::stop() {
  if (server_) server_->stop();
}

void AnnotationServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace deidkit
