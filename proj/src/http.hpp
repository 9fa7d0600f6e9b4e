#pragma once

// Single point of inclusion for cpp-httplib so every translation unit sees
// the same configuration.
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"

#include <string>
#include <string_view>
#include <utility>

namespace fairmeta::detail {

/// Splits "https://host:port/a/b" into {"https://host:port", "/a/b"}.
inline std::pair<std::string, std::string> split_url(std::string_view url) {
  const std::size_t scheme = url.find("://");
  const std::size_t host_start = scheme == std::string_view::npos ? 0 : scheme + 3;
  const std::size_t path_start = url.find('/', host_start);
  if (path_start == std::string_view::npos) return {std::string(url), "/"};
  std::string path(url.substr(path_start));
  while (path.size() > 1 && path.back() == '/') path.pop_back();
  return {std::string(url.substr(0, path_start)), path};
}

}  // namespace fairmeta::detail
