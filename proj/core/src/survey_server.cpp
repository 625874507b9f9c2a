#include "crowdimpute/survey_server.hpp"

#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "crowdimpute/error.hpp"

namespace crowdimpute {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

std::string fallback_page(const SurveyStore& store) {
  std::string items;
  for (const auto& id : store.questionnaire_ids()) {
    items += "<li><a href=\"/api/questionnaires/" + id + "\">" + id + "</a></li>";
  }
  return "<!doctype html><html><head><meta charset=\"utf-8\"><title>Survey</title></head><body>"
         "<h1>Survey service</h1><p>No client bundle is installed. Questionnaires:</p><ul>" +
         items + "</ul><p>Job status: <a href=\"/api/jobs/" + store.job().id + "\">" + store.job().id +
         "</a></p></body></html>";
}

}  // namespace

struct SurveyServer::Impl {
  SurveyStore& store;
  ServerOptions options;
  httplib::Server http;
  std::thread worker;
  int bound_port = -1;

  Impl(SurveyStore& s, ServerOptions o) : store(s), options(std::move(o)) { routes(); }

  void routes() {
    http.Get("/api/questionnaires", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"job_id", store.job().id}, {"questionnaires", store.questionnaire_ids()}});
    });

    http.Get(R"(/api/questionnaires/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const auto* qn = store.questionnaire(req.matches[1].str());
      if (!qn) return send_error(res, 404, "unknown questionnaire '" + req.matches[1].str() + "'");
      send_json(res, 200, to_json(*qn));
    });

    http.Post(R"(/api/questionnaires/([^/]+)/submissions)",
              [this](const httplib::Request& req, httplib::Response& res) {
                json body;
                try {
                  body = json::parse(req.body);
                } catch (const json::parse_error&) {
                  return send_error(res, 400, "request body is not valid JSON");
                }
                try {
                  const auto outcomes = store.submit(submission_from_json(req.matches[1].str(), body));
                  send_json(res, 200, {{"outcomes", to_json(outcomes)}});
                } catch (const NotFoundError& e) {
                  send_error(res, 404, e.what());
                } catch (const PreconditionError& e) {
                  send_error(res, 400, e.what());
                }
              });

    http.Get(R"(/api/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        send_json(res, 200, to_json(store.status(req.matches[1].str())));
      } catch (const NotFoundError& e) {
        send_error(res, 404, e.what());
      }
    });

    const bool bundled = options.static_dir && std::filesystem::exists(*options.static_dir / "index.html");
    if (bundled) {
      if (!http.set_mount_point("/", options.static_dir->string())) {
        throw ConfigError("cannot serve static files from " + options.static_dir->string());
      }
    } else {
      http.Get("/", [this](const httplib::Request&, httplib::Response& res) {
        res.set_content(fallback_page(store), "text/html; charset=utf-8");
      });
    }

    http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      } catch (...) {
        send_error(res, 500, "internal error");
      }
    });
  }
};

SurveyServer::SurveyServer(SurveyStore& store, ServerOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {}

SurveyServer::~SurveyServer() { stop(); }

int SurveyServer::bind() {
  if (impl_->bound_port > 0) return impl_->bound_port;
  const int port = impl_->options.port == 0
                       ? impl_->http.bind_to_any_port(impl_->options.host)
                       : (impl_->http.bind_to_port(impl_->options.host, impl_->options.port)
                              ? impl_->options.port
                              : -1);
  if (port <= 0) {
    throw Error("cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
  }
  impl_->bound_port = port;
  return port;
}

void SurveyServer::listen() {
  bind();
  impl_->http.listen_after_bind();
}

void SurveyServer::start() {
  bind();
  impl_->worker = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
}

void SurveyServer::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

int SurveyServer::port() const noexcept { return impl_->bound_port; }

}  // namespace crowdimpute
