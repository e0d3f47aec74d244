#pragma once

#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "samem/cot_forge.hpp"
#include "samem/error.hpp"

namespace samem::cot {

struct HttpAnnotatorConfig {
  std::string host = "127.0.0.1";
  int port = 80;
  std::string path = "/annotate";
  int max_retries = 2;  // attempts after the first try
  int timeout_ms = 5000;
};

// Client for an external annotation service. Request body:
//   {"instruction": ..., "target": ..., "frame_refs": [history..., current]}
// Expected reply:
//   {"perception": ..., "target_env": ..., "env_action": ...}
// Transport errors and non-200 statuses are retried max_retries times, then
// raised as AnnotationError; malformed replies fail immediately.
class HttpAnnotator : public Annotator {
 public:
  explicit HttpAnnotator(HttpAnnotatorConfig cfg) : cfg_(std::move(cfg)) {}

  CoTBlock annotate(const CoTSample& skeleton) const override {
    nlohmann::json request;
    request["instruction"] = skeleton.instruction;
    request["target"] = skeleton.target;
    request["frame_refs"] = skeleton.history;
    request["frame_refs"].push_back(skeleton.current);
    const std::string body = request.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      // One client per call: annotate() must be safe from several threads.
      httplib::Client client(cfg_.host, cfg_.port);
      client.set_connection_timeout(0, cfg_.timeout_ms * 1000);
      client.set_read_timeout(0, cfg_.timeout_ms * 1000);
      auto res = client.Post(cfg_.path, body, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        last_error = "HTTP status " + std::to_string(res->status);
        continue;
      }
      return parse_reply(res->body);
    }
    throw AnnotationError("annotation service failed after " +
                          std::to_string(cfg_.max_retries + 1) +
                          " attempts: " + last_error);
  }

 private:
  static CoTBlock parse_reply(const std::string& body) {
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw AnnotationError(std::string("malformed annotation reply: ") +
                            e.what());
    }
    CoTBlock cot;
    try {
      cot.perception = reply.at("perception").get<std::string>();
      cot.target_env = reply.at("target_env").get<std::string>();
      cot.env_action = reply.at("env_action").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw AnnotationError(std::string("annotation reply missing sections: ") +
                            e.what());
    }
    return cot;
  }

  HttpAnnotatorConfig cfg_;
};

}  // namespace samem::cot
