#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace s2t {

// scheme://host[:port][/base/path]
struct HttpEndpoint {
  std::string scheme = "https";
  std::string host;
  int port = 443;
  std::string base_path;

  // Throws Error on a malformed URL or unsupported scheme.
  static HttpEndpoint parse(std::string_view url);
  std::string origin() const;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

// POSTs a JSON body to base_path + path. Throws TransportError when no HTTP
// response arrives (connection refused, timeout, TLS failure).
HttpResponse http_post_json(const HttpEndpoint& endpoint, std::string_view path,
                            const std::string& body, const HttpHeaders& headers,
                            double timeout_seconds);

}  // namespace s2t
