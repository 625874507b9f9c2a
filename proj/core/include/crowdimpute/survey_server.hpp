#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "crowdimpute/survey_store.hpp"

namespace crowdimpute {

struct ServerOptions {
  std::string host = "127.0.0.1";
  /// 0 picks a free port.
  int port = 8080;
  /// Directory holding the survey client bundle (index.html and assets).
  /// Without one, GET / answers with a small page listing the questionnaires.
  std::optional<std::filesystem::path> static_dir;
};

/// HTTP front end of a SurveyStore:
///   GET  /api/questionnaires              list of questionnaire ids
///   GET  /api/questionnaires/{id}         questionnaire JSON
///   POST /api/questionnaires/{id}/submissions
///        {"worker_id": ..., "answers": {...}} -> {"outcomes": [...]}
///   GET  /api/jobs/{id}                   job status
///   GET  /                                survey client
/// Errors come back as {"error": message} with 400 or 404.
class SurveyServer {
 public:
  SurveyServer(SurveyStore& store, ServerOptions options);
  ~SurveyServer();

  SurveyServer(const SurveyServer&) = delete;
  SurveyServer& operator=(const SurveyServer&) = delete;

  /// Binds the socket and returns the bound port. Throws Error on failure.
  int bind();
  /// Serves until stop(); binds first if needed.
  void listen();
  /// listen() on a background thread; returns once the port is bound.
  void start();
  void stop();
  int port() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace crowdimpute
