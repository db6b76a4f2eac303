#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace faunawatch {

struct Url {
  std::string scheme;
  std::string host;  // includes :port when present
  std::string path;
  std::string query;     // without '?'
  std::string fragment;  // without '#'
};

namespace detail {

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return char(std::tolower(c));
  });
  return out;
}

}  // namespace detail

inline std::optional<Url> parse_url(std::string_view s) {
  auto scheme_end = s.find("://");
  if (scheme_end == std::string_view::npos || scheme_end == 0) return {};
  Url u;
  u.scheme = detail::ascii_lower(s.substr(0, scheme_end));
  for (char c : u.scheme)
    if (!std::isalpha(static_cast<unsigned char>(c)) && c != '+' && c != '-')
      return {};
  std::string_view rest = s.substr(scheme_end + 3);
  auto host_end = rest.find_first_of("/?#");
  std::string_view host =
      host_end == std::string_view::npos ? rest : rest.substr(0, host_end);
  if (host.empty()) return {};
  u.host = detail::ascii_lower(host);
  if (host_end == std::string_view::npos) return u;
  rest = rest.substr(host_end);
  auto frag = rest.find('#');
  if (frag != std::string_view::npos) {
    u.fragment = std::string(rest.substr(frag + 1));
    rest = rest.substr(0, frag);
  }
  auto q = rest.find('?');
  if (q != std::string_view::npos) {
    u.query = std::string(rest.substr(q + 1));
    rest = rest.substr(0, q);
  }
  u.path = std::string(rest);
  return u;
}

// Canonical identity form used for hit deduplication and article ids:
// scheme collapsed to https (http and https identify the same article),
// host lowercased, fragment dropped, one trailing slash dropped, and
// utm_* tracking parameters removed. Everything else is preserved
// byte-for-byte.
inline std::optional<std::string> normalize_url(std::string_view raw) {
  auto parsed = parse_url(raw);
  if (!parsed) return {};
  Url& u = *parsed;
  if (u.scheme == "http") u.scheme = "https";
  if (!u.path.empty() && u.path.back() == '/') u.path.pop_back();
  std::string query;
  if (!u.query.empty()) {
    std::string_view rest = u.query;
    while (!rest.empty()) {
      auto amp = rest.find('&');
      std::string_view param =
          amp == std::string_view::npos ? rest : rest.substr(0, amp);
      rest = amp == std::string_view::npos ? std::string_view{}
                                           : rest.substr(amp + 1);
      auto eq = param.find('=');
      std::string_view name =
          eq == std::string_view::npos ? param : param.substr(0, eq);
      if (name.substr(0, 4) == "utm_") continue;
      if (!query.empty()) query.push_back('&');
      query.append(param);
    }
  }
  std::string out = u.scheme + "://" + u.host + u.path;
  if (!query.empty()) out += "?" + query;
  return out;
}

inline std::string url_encode(std::string_view s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(char(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xf]);
    }
  }
  return out;
}

}  // namespace faunawatch
