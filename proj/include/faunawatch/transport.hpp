#pragma once

#include <chrono>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>

#include "faunawatch/error.hpp"
#include "faunawatch/hash.hpp"
#include "faunawatch/io.hpp"
#include "faunawatch/time.hpp"
#include "faunawatch/url.hpp"

namespace faunawatch {

struct HttpResponse {
  int status = 0;
  std::string body;
  std::string content_type;
  std::string final_url;
};

// One ArtList request against the news index. taxon and keyword identify
// the fixture slot during replay; the live side only needs the query.
struct ArtListRequest {
  std::string taxon;
  std::string keyword;
  std::string query_text;
  TimeWindow window;
  int max_records = 250;
};

inline std::string build_doc_api_url(const ArtListRequest& req) {
  return "https://api.gdeltproject.org/api/v2/doc/doc?query=" +
         url_encode(req.query_text) +
         "&mode=ArtList&format=json&startdatetime=" +
         format_gdelt_datetime(req.window.start) +
         "&enddatetime=" + format_gdelt_datetime(req.window.end) +
         "&maxrecords=" + std::to_string(req.max_records) + "&sort=DateAsc";
}

// The seam every network-touching stage goes through. Injecting a fixture
// implementation makes scans and fetches replayable and provably offline.
class Transport {
 public:
  virtual ~Transport() = default;

  // True when requests leave the machine; enables the index's 3-day
  // search-horizon check and politeness delays.
  virtual bool live() const = 0;

  virtual HttpResponse get(const std::string& url) = 0;

  virtual HttpResponse artlist(const ArtListRequest& req) {
    return get(build_doc_api_url(req));
  }

  size_t requests() const { return requests_; }

 protected:
  size_t requests_ = 0;
};

// Byte-exact replay from a directory tree:
//   <root>/<taxon>/<keyword>/<start>-<end>.json   ArtList responses
//   <root>/pages/<id>.html                        article bodies, id =
//                                                 sha256 of normalized URL
// A missing file is a broken fixture set and fails loudly.
class FixtureTransport : public Transport {
 public:
  explicit FixtureTransport(std::filesystem::path root)
      : root_(std::move(root)) {}

  bool live() const override { return false; }

  HttpResponse get(const std::string& url) override {
    ++requests_;
    auto normalized = normalize_url(url);
    if (!normalized)
      fail(errc::transport_error, "fixture get: unparsable url " + url);
    auto path = root_ / "pages" / (sha256_hex(*normalized) + ".html");
    if (!std::filesystem::exists(path))
      fail(errc::transport_error,
           "no fixture page for " + url + " (expected " + path.string() + ")");
    return {200, read_file(path), "text/html; charset=utf-8", url};
  }

  HttpResponse artlist(const ArtListRequest& req) override {
    ++requests_;
    auto path = root_ / req.taxon / req.keyword /
                (format_gdelt_datetime(req.window.start) + "-" +
                 format_gdelt_datetime(req.window.end) + ".json");
    if (!std::filesystem::exists(path))
      fail(errc::transport_error, "no fixture artlist for taxon=" + req.taxon +
                                      " keyword=" + req.keyword +
                                      " (expected " + path.string() + ")");
    return {200, read_file(path), "application/json",
            build_doc_api_url(req)};
  }

 private:
  std::filesystem::path root_;
};

}  // namespace faunawatch

// The live transport is only compiled where it is wanted: it drags in
// cpp-httplib and OpenSSL, which test binaries replaying fixtures never
// need.
#if defined(FAUNAWATCH_ENABLE_LIVE_TRANSPORT)

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace faunawatch {

// Sequential polite HTTP client: at least min_delay between requests to
// the same host, optional read-through response cache (FAUNAWATCH_CACHE).
class LiveTransport : public Transport {
 public:
  explicit LiveTransport(
      std::optional<std::filesystem::path> cache_dir = {},
      std::chrono::milliseconds min_delay = std::chrono::milliseconds(1000))
      : cache_dir_(std::move(cache_dir)), min_delay_(min_delay) {
    if (cache_dir_) std::filesystem::create_directories(*cache_dir_);
  }

  bool live() const override { return true; }

  HttpResponse get(const std::string& url) override {
    if (cache_dir_) {
      auto cached = cache_read(url);
      if (cached) return *cached;
    }
    ++requests_;
    auto parsed = parse_url(url);
    if (!parsed)
      fail(errc::transport_error, "unparsable url: " + url);
    throttle(parsed->host);
    std::string origin = parsed->scheme + "://" + parsed->host;
    httplib::Client client(origin);
    client.set_follow_location(true);
    client.set_connection_timeout(10);
    client.set_read_timeout(20);
    client.set_default_headers(
        {{"User-Agent", "faunawatch/1.0 (research crawler)"}});
    std::string target = parsed->path.empty() ? "/" : parsed->path;
    if (!parsed->query.empty()) target += "?" + parsed->query;
    auto res = client.Get(target);
    if (!res)
      fail(errc::transport_error,
           "request failed for " + url + ": " + httplib::to_string(res.error()));
    HttpResponse out{res->status, res->body,
                     res->get_header_value("Content-Type"), url};
    if (cache_dir_ && out.status >= 200 && out.status < 300)
      cache_write(url, out);
    return out;
  }

 private:
  void throttle(const std::string& host) {
    using clock = std::chrono::steady_clock;
    auto now = clock::now();
    auto it = last_request_.find(host);
    if (it != last_request_.end()) {
      auto wait = it->second + min_delay_ - now;
      if (wait.count() > 0) std::this_thread::sleep_for(wait);
    }
    last_request_[host] = clock::now();
  }

  std::filesystem::path cache_path(const std::string& url) const {
    return *cache_dir_ / (sha256_hex(url) + ".http");
  }

  std::optional<HttpResponse> cache_read(const std::string& url) const {
    auto path = cache_path(url);
    if (!std::filesystem::exists(path)) return {};
    std::string raw = read_file(path);
    auto nl1 = raw.find('\n');
    auto nl2 = raw.find('\n', nl1 + 1);
    if (nl1 == std::string::npos || nl2 == std::string::npos) return {};
    HttpResponse out;
    out.status = std::atoi(raw.substr(0, nl1).c_str());
    out.content_type = raw.substr(nl1 + 1, nl2 - nl1 - 1);
    out.body = raw.substr(nl2 + 1);
    out.final_url = url;
    return out;
  }

  void cache_write(const std::string& url, const HttpResponse& r) const {
    write_file(cache_path(url), std::to_string(r.status) + "\n" +
                                    r.content_type + "\n" + r.body);
  }

  std::optional<std::filesystem::path> cache_dir_;
  std::chrono::milliseconds min_delay_;
  std::unordered_map<std::string, std::chrono::steady_clock::time_point>
      last_request_;
};

}  // namespace faunawatch

#endif  // FAUNAWATCH_ENABLE_LIVE_TRANSPORT
