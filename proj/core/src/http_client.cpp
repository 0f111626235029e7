#include "s2t/http_client.hpp"

#include <httplib.h>

#include "s2t/error.hpp"

namespace s2t {

HttpEndpoint HttpEndpoint::parse(std::string_view url) {
  HttpEndpoint ep;
  const auto sep = url.find("://");
  if (sep == std::string_view::npos) throw Error("URL needs a scheme: " + std::string(url));
  ep.scheme = std::string(url.substr(0, sep));
  if (ep.scheme != "http" && ep.scheme != "https") {
    throw Error("unsupported URL scheme: " + ep.scheme);
  }
  ep.port = ep.scheme == "https" ? 443 : 80;
  const std::string rest(url.substr(sep + 3));
  const auto slash = rest.find('/');
  std::string authority = rest.substr(0, slash);
  if (slash != std::string::npos) ep.base_path = rest.substr(slash);
  while (!ep.base_path.empty() && ep.base_path.back() == '/') ep.base_path.pop_back();
  const auto colon = authority.rfind(':');
  if (colon != std::string::npos) {
    try {
      ep.port = std::stoi(authority.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error("invalid port in URL: " + std::string(url));
    }
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) throw Error("URL has no host: " + std::string(url));
  ep.host = authority;
  return ep;
}

std::string HttpEndpoint::origin() const {
  return scheme + "://" + host + ":" + std::to_string(port);
}

HttpResponse http_post_json(const HttpEndpoint& endpoint, std::string_view path,
                            const std::string& body, const HttpHeaders& headers,
                            double timeout_seconds) {
  httplib::Client client(endpoint.origin());
  const auto secs = static_cast<time_t>(timeout_seconds);
  const auto usecs = static_cast<time_t>((timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  const std::string full_path = endpoint.base_path + std::string(path);
  auto res = client.Post(full_path, h, body, "application/json");
  if (!res) {
    throw TransportError("POST " + endpoint.origin() + full_path + " failed: " +
                         httplib::to_string(res.error()));
  }
  return HttpResponse{res->status, res->body};
}

}  // namespace s2t
