#include "ranslice/controller/rest.hpp"

#include <vector>

#include "ranslice/policy/document.hpp"

namespace ranslice::controller {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

RestResponse error(int status, const std::string& code, const std::string& message, const std::string& field = {}) {
  ordered_json body = {{"code", code}, {"message", message}};
  if (!field.empty()) body["field"] = field;
  return {status, body};
}

int status_for(Errc code) {
  switch (code) {
    case Errc::ValidationFailed:
      return 400;
    case Errc::UnknownSlice:
    case Errc::UnknownEnb:
      return 404;
    case Errc::InvalidState:
    case Errc::NotSynced:
    case Errc::AlreadyRegistered:
      return 409;
  }
  return 500;
}

std::vector<std::string> segments(const std::string& path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    auto j = path.find('/', i);
    if (j == std::string::npos) j = path.size();
    if (j > i) out.push_back(path.substr(i, j - i));
    i = j;
  }
  return out;
}

std::optional<std::uint64_t> number(const std::string& s) {
  try {
    std::size_t used = 0;
    auto v = std::stoull(s, &used, 0);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (const std::logic_error&) {
    return std::nullopt;
  }
}

}  // namespace

RestResponse RestApi::handle(const RestRequest& req) {
  if (!token_.empty() && req.authorization != "Bearer " + token_)
    return error(401, "Unauthorized", "missing or wrong bearer token");

  auto seg = segments(req.path);
  const auto& m = req.method;
  try {
    if (seg.size() == 1 && seg[0] == "enbs") {
      if (m == "GET") {
        ordered_json out = ordered_json::array();
        for (const auto& [id, e] : controller_.enbs()) out.push_back(controller_.enb_json(e));
        return {200, out};
      }
      if (m == "POST") {
        auto doc = json::parse(req.body);
        if (!doc.is_object() || !doc.contains("enb_id")) return error(400, "ValidationFailed", "enb_id missing", "enb_id");
        const auto& v = doc.at("enb_id");
        std::optional<std::uint64_t> id;
        if (v.is_number_unsigned()) id = v.get<std::uint64_t>();
        if (v.is_string()) id = number(v.get<std::string>());
        if (!id) return error(400, "ValidationFailed", "enb_id must be an integer", "enb_id");
        if (!controller_.register_enb(*id))
          return error(409, "AlreadyRegistered", "eNB " + to_hex(*id) + " is already registered", "enb_id");
        return {201, controller_.enb_json(controller_.enbs().at(*id))};
      }
    }

    if (seg.size() == 1 && seg[0] == "ues" && m == "GET") {
      ordered_json out = ordered_json::array();
      for (const auto& u : controller_.ues()) out.push_back(controller_.ue_json(u));
      return {200, out};
    }

    if (seg.size() == 2 && seg[0] == "jobs" && m == "GET") {
      auto id = number(seg[1]);
      auto job = id ? controller_.job(*id) : std::nullopt;
      if (!job) return error(404, "UnknownJob", "no job " + seg[1]);
      return {200, controller_.job_json(*job)};
    }

    if (!seg.empty() && seg[0] == "slices") {
      if (seg.size() == 1) {
        if (m == "GET") {
          ordered_json out = ordered_json::array();
          for (const auto& [rsi, rec] : controller_.slices()) out.push_back(controller_.slice_json(rsi));
          return {200, out};
        }
        if (m == "POST") {
          auto tpl = policy::template_from_json(json::parse(req.body));
          auto job = controller_.commission(tpl);
          return {202, {{"job_id", job}, {"rsi_id", tpl.rsi_id}}};
        }
      } else {
        auto id = number(seg[1]);
        if (!id || *id > 0xFFFFFFFFu) return error(404, "UnknownSlice", "no slice " + seg[1]);
        auto rsi = static_cast<RsiId>(*id);
        if (seg.size() == 2) {
          if (m == "GET") {
            if (!controller_.slice(rsi)) return error(404, "UnknownSlice", "no slice " + seg[1]);
            return {200, controller_.slice_json(rsi)};
          }
          if (m == "PUT") {
            auto doc = json::parse(req.body);
            if (!doc.is_object() || !doc.contains("rrm_policy"))
              return error(400, "ValidationFailed", "rrm_policy missing", "rrm_policy");
            auto policy = policy::policy_from_json(doc.at("rrm_policy"));
            auto job = controller_.update(rsi, policy);
            return {202, {{"job_id", job}, {"rsi_id", rsi}}};
          }
          if (m == "DELETE") {
            auto job = controller_.decommission(rsi);
            return {202, {{"job_id", job}, {"rsi_id", rsi}}};
          }
        }
        if (seg.size() == 3 && m == "POST" && seg[2] == "activate") {
          controller_.activate(rsi);
          return {200, controller_.slice_json(rsi)};
        }
        if (seg.size() == 3 && m == "POST" && seg[2] == "deactivate") {
          controller_.deactivate(rsi);
          return {200, controller_.slice_json(rsi)};
        }
        if (seg.size() == 3 && m == "GET" && seg[2] == "measurements") {
          if (!controller_.slice(rsi)) return error(404, "UnknownSlice", "no slice " + seg[1]);
          Millis since = 0;
          if (auto it = req.query.find("since"); it != req.query.end()) {
            auto v = number(it->second);
            if (!v) return error(400, "ValidationFailed", "since must be an integer", "since");
            since = static_cast<Millis>(*v);
          }
          ordered_json out = ordered_json::array();
          for (const auto& rec : controller_.measurements(rsi, since)) out.push_back(controller_.measurement_json(rec));
          return {200, out};
        }
      }
    }
  } catch (const json::parse_error& e) {
    return error(400, "ValidationFailed", std::string("body is not valid JSON: ") + e.what());
  } catch (const policy::ValidationError& e) {
    return error(400, "ValidationFailed", e.what(), e.field());
  } catch (const ControllerError& e) {
    return error(status_for(e.code()), to_string(e.code()), e.what(), e.field());
  } catch (const json::exception& e) {
    return error(400, "ValidationFailed", e.what());
  }
  return error(404, "NotFound", m + " " + req.path + " is not a known endpoint");
}

}  // namespace ranslice::controller
