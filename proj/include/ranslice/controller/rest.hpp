#pragma once

#include <map>
#include <string>

#include "json.hpp"

#include "ranslice/controller/controller.hpp"

namespace ranslice::controller {

struct RestRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
  /// Raw Authorization header value.
  std::string authorization;
};

struct RestResponse {
  int status = 200;
  nlohmann::ordered_json body;
};

/// Northbound provisioning API over a Controller. Transport-free: the HTTP
/// server (or a test) hands in parsed requests. Must run on the controller's
/// thread.
///
///   POST   /enbs                        {enb_id}
///   GET    /enbs
///   POST   /slices                      template document -> 202 {job_id}
///   GET    /slices, /slices/{id}
///   PUT    /slices/{id}                 {rrm_policy} or a full template -> 202 {job_id}
///   POST   /slices/{id}/activate|deactivate
///   DELETE /slices/{id}                 -> 202 {job_id}
///   GET    /slices/{id}/measurements?since=ms
///   GET    /ues
///   GET    /jobs/{id}
///
/// Errors are {code, message[, field]}.
class RestApi {
 public:
  /// An empty token disables authentication.
  RestApi(Controller& controller, std::string token) : controller_(controller), token_(std::move(token)) {}

  RestResponse handle(const RestRequest& req);

 private:
  Controller& controller_;
  std::string token_;
};

/// Environment variable holding the admin token for server and client.
inline constexpr const char* kTokenEnv = "RANSLICE_ADMIN_TOKEN";

}  // namespace ranslice::controller
