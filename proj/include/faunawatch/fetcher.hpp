#pragma once

#include <iconv.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "faunawatch/error.hpp"
#include "faunawatch/gdelt.hpp"
#include "faunawatch/hash.hpp"
#include "faunawatch/record.hpp"
#include "faunawatch/transport.hpp"
#include "faunawatch/url.hpp"

namespace faunawatch {

// Mobile-formatted pages carry less chrome, so they are preferred when the
// index offers one; an unparsable mobile URL falls back to the desktop one.
inline std::string select_fetch_url(const ArticleRef& ref) {
  if (ref.mobile_url && parse_url(*ref.mobile_url)) return *ref.mobile_url;
  return ref.url;
}

namespace detail {

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return char(std::tolower(c));
  });
  return out;
}

// Replaces ill-formed UTF-8 sequences with U+FFFD.
inline std::string utf8_lossy(std::string_view in) {
  static const char* replacement = "\xEF\xBF\xBD";
  std::string out;
  out.reserve(in.size());
  size_t i = 0;
  while (i < in.size()) {
    unsigned char c = in[i];
    size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3
                          : (c >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > in.size()) {
      out += replacement;
      ++i;
      continue;
    }
    bool ok = true;
    for (size_t k = 1; k < len; ++k)
      if ((static_cast<unsigned char>(in[i + k]) >> 6) != 0x2) ok = false;
    if (!ok) {
      out += replacement;
      ++i;
      continue;
    }
    out.append(in.substr(i, len));
    i += len;
  }
  return out;
}

inline void append_codepoint_utf8(std::string& out, unsigned long cp) {
  if (cp > 0x10FFFF) return;
  if (cp < 0x80) {
    out.push_back(char(cp));
  } else if (cp < 0x800) {
    out.push_back(char(0xC0 | (cp >> 6)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(char(0xE0 | (cp >> 12)));
    out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(char(0xF0 | (cp >> 18)));
    out.push_back(char(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  }
}

// Decodes the handful of entities that matter for running text.
inline std::string decode_entity(std::string_view entity) {
  if (entity == "amp") return "&";
  if (entity == "lt") return "<";
  if (entity == "gt") return ">";
  if (entity == "quot") return "\"";
  if (entity == "apos" || entity == "#39") return "'";
  if (entity == "nbsp") return " ";
  if (entity.size() > 1 && entity[0] == '#') {
    std::string out;
    unsigned long cp = 0;
    if (entity[1] == 'x' || entity[1] == 'X')
      cp = std::strtoul(std::string(entity.substr(2)).c_str(), nullptr, 16);
    else
      cp = std::strtoul(std::string(entity.substr(1)).c_str(), nullptr, 10);
    append_codepoint_utf8(out, cp);
    return out;
  }
  return std::string("&") + std::string(entity) + ";";
}

inline size_t utf8_length(std::string_view s) {
  size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

inline std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      if (!out.empty()) pending = true;
      continue;
    }
    if (pending) {
      out.push_back(' ');
      pending = false;
    }
    out.push_back(char(c));
  }
  return out;
}

inline bool is_removed_subtree(const std::string& tag) {
  return tag == "script" || tag == "style" || tag == "nav" ||
         tag == "header" || tag == "footer" || tag == "aside" ||
         tag == "form";
}

inline bool is_paragraph_tag(const std::string& tag) {
  return tag == "p" || tag == "h1" || tag == "h2" || tag == "h3" ||
         tag == "li" || tag == "blockquote";
}

// Block-level openers that imply </p> in sloppy HTML.
inline bool closes_open_p(const std::string& tag) {
  return tag == "div" || tag == "ul" || tag == "ol" || tag == "table" ||
         tag == "section" || tag == "article" || tag == "pre" ||
         tag == "figure";
}

}  // namespace detail

inline constexpr size_t kMinParagraphChars = 25;

// Flattens HTML to running text: the text of block elements (p, h1-h3,
// li, blockquote) becomes one paragraph each, script/style/nav/header/
// footer/aside/form subtrees are removed, whitespace is collapsed, and
// paragraphs under 25 characters are dropped as boilerplate (menu items,
// button labels). Paragraphs join with one blank line.
inline std::string extract_text(std::string_view html_bytes) {
  std::string html = detail::utf8_lossy(html_bytes);
  std::vector<std::string> paragraphs;
  std::vector<std::string> capture_stack;  // paragraph buffers
  std::vector<std::string> capture_tags;
  int removed_depth = 0;

  auto emit = [&](std::string&& raw) {
    std::string text = detail::collapse_whitespace(raw);
    if (detail::utf8_length(text) >= kMinParagraphChars)
      paragraphs.push_back(std::move(text));
  };
  auto close_top = [&] {
    if (capture_stack.empty()) return;
    emit(std::move(capture_stack.back()));
    capture_stack.pop_back();
    capture_tags.pop_back();
  };

  size_t i = 0;
  const size_t n = html.size();
  while (i < n) {
    char c = html[i];
    if (c == '<') {
      if (html.compare(i, 4, "<!--") == 0) {
        auto end = html.find("-->", i + 4);
        i = end == std::string::npos ? n : end + 3;
        continue;
      }
      if (i + 1 < n && (html[i + 1] == '!' || html[i + 1] == '?')) {
        auto end = html.find('>', i);
        i = end == std::string::npos ? n : end + 1;
        continue;
      }
      size_t j = i + 1;
      bool closing = j < n && html[j] == '/';
      if (closing) ++j;
      std::string tag;
      while (j < n && (std::isalnum(static_cast<unsigned char>(html[j])) ||
                       html[j] == '-'))
        tag.push_back(char(std::tolower(static_cast<unsigned char>(html[j++]))));
      if (tag.empty()) {
        // Stray '<' is ordinary text.
        if (removed_depth == 0 && !capture_stack.empty())
          capture_stack.back().push_back('<');
        ++i;
        continue;
      }
      // Skip to the end of the tag, honoring quoted attribute values.
      bool self_closing = false;
      char quote = 0;
      while (j < n) {
        char a = html[j];
        if (quote) {
          if (a == quote) quote = 0;
        } else if (a == '"' || a == '\'') {
          quote = a;
        } else if (a == '>') {
          break;
        } else if (a == '/' && j + 1 < n && html[j + 1] == '>') {
          self_closing = true;
        }
        ++j;
      }
      i = j < n ? j + 1 : n;

      if (tag == "script" || tag == "style") {
        if (!closing) {
          // Raw text elements: skip to the matching close tag. The close
          // name must end at a tag boundary ("</scripty>" is content).
          std::string close = "</" + tag;
          size_t k = i;
          while (k < n) {
            auto cand = html.find('<', k);
            if (cand == std::string::npos) {
              k = n;
              break;
            }
            size_t after = cand + close.size();
            bool name_matches = detail::to_lower(std::string_view(html).substr(
                                    cand, close.size())) == close;
            bool boundary =
                after >= n || html[after] == '>' || html[after] == '/' ||
                std::isspace(static_cast<unsigned char>(html[after]));
            if (name_matches && boundary) {
              auto end = html.find('>', cand);
              k = end == std::string::npos ? n : end + 1;
              break;
            }
            k = cand + 1;
          }
          i = k;
        }
        continue;
      }
      if (detail::is_removed_subtree(tag)) {
        if (closing)
          removed_depth = std::max(0, removed_depth - 1);
        else if (!self_closing)
          ++removed_depth;
        continue;
      }
      if (removed_depth > 0) continue;
      if (detail::is_paragraph_tag(tag)) {
        if (closing) {
          close_top();
        } else if (!self_closing) {
          // <p> cannot nest; sloppy HTML relies on the implied close.
          if (!capture_tags.empty() && capture_tags.back() == "p")
            close_top();
          capture_stack.emplace_back();
          capture_tags.push_back(tag);
        }
        continue;
      }
      if (!closing && detail::closes_open_p(tag) && !capture_tags.empty() &&
          capture_tags.back() == "p")
        close_top();
      if (tag == "br" && !capture_stack.empty())
        capture_stack.back().push_back(' ');
      continue;
    }
    if (c == '&') {
      auto semi = html.find(';', i + 1);
      if (semi != std::string::npos && semi - i <= 10) {
        std::string decoded =
            detail::decode_entity(std::string_view(html).substr(
                i + 1, semi - i - 1));
        if (removed_depth == 0 && !capture_stack.empty())
          capture_stack.back().append(decoded);
        i = semi + 1;
        continue;
      }
    }
    if (removed_depth == 0 && !capture_stack.empty())
      capture_stack.back().push_back(c);
    ++i;
  }
  while (!capture_stack.empty()) close_top();

  if (paragraphs.empty())
    fail(errc::empty_document, "no paragraph of at least " +
                                   std::to_string(kMinParagraphChars) +
                                   " characters survived extraction");
  std::string out;
  for (size_t k = 0; k < paragraphs.size(); ++k) {
    if (k) out += "\n\n";
    out += paragraphs[k];
  }
  return out;
}

namespace detail {

// Charset declared by header or meta tag, lowercase, empty when absent.
inline std::string declared_charset(std::string_view content_type,
                                    std::string_view head) {
  auto find_in = [](std::string_view s) -> std::string {
    std::string lower = to_lower(s);
    auto pos = lower.find("charset=");
    if (pos == std::string::npos) return {};
    pos += 8;
    while (pos < lower.size() && (lower[pos] == '"' || lower[pos] == '\'' ||
                                  lower[pos] == ' '))
      ++pos;
    std::string out;
    while (pos < lower.size() &&
           (std::isalnum(static_cast<unsigned char>(lower[pos])) ||
            lower[pos] == '-' || lower[pos] == '_'))
      out.push_back(lower[pos++]);
    return out;
  };
  std::string cs = find_in(content_type);
  if (!cs.empty()) return cs;
  return find_in(head.substr(0, std::min<size_t>(head.size(), 2048)));
}

// Transcodes through iconv; any failure falls back to lossy UTF-8, and a
// misdecoded page is left for the relevance filter to discard.
inline std::string transcode_to_utf8(std::string_view body,
                                     const std::string& charset) {
  iconv_t cd = iconv_open("UTF-8", charset.c_str());
  if (cd == reinterpret_cast<iconv_t>(-1)) return utf8_lossy(body);
  std::string out;
  out.reserve(body.size() * 2);
  std::vector<char> in(body.begin(), body.end());
  char* in_ptr = in.data();
  size_t in_left = in.size();
  std::vector<char> buf(4096);
  while (in_left > 0) {
    char* out_ptr = buf.data();
    size_t out_left = buf.size();
    size_t rc = iconv(cd, &in_ptr, &in_left, &out_ptr, &out_left);
    out.append(buf.data(), buf.size() - out_left);
    if (rc == size_t(-1)) {
      if (errno == E2BIG) continue;
      // Skip the offending byte and keep going.
      if (in_left > 0) {
        ++in_ptr;
        --in_left;
        out += "\xEF\xBF\xBD";
        continue;
      }
      break;
    }
  }
  iconv_close(cd);
  return out;
}

}  // namespace detail

struct FetchOptions {
  int retries = 2;
  std::chrono::milliseconds initial_backoff{2000};
  std::function<utc_seconds()> clock;  // defaults to the system clock
};

inline utc_seconds system_clock_utc() {
  return std::chrono::floor<std::chrono::seconds>(
      std::chrono::system_clock::now());
}

// Retrieves one article and builds its unclassified, unscored record.
// Identity is the SHA-256 of the normalized index URL, so the same
// article found through URL variants lands on one record.
inline ArticleRecord fetch_article(const ArticleRef& ref, Transport& transport,
                                   const FetchOptions& opts = {}) {
  std::string target = select_fetch_url(ref);
  HttpResponse resp;
  auto backoff = opts.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    bool transport_failed = false;
    std::string transport_message;
    try {
      resp = transport.get(target);
    } catch (const Error& e) {
      if (e.code() != errc::transport_error) throw;
      transport_failed = true;
      transport_message = e.what();
    }
    if (!transport_failed && resp.status >= 200 && resp.status < 300) break;
    if (attempt >= opts.retries) {
      if (transport_failed)
        fail(errc::transport_error,
             transport_message + " (after " + std::to_string(attempt + 1) +
                 " attempts)");
      fail(errc::http_error, "HTTP " + std::to_string(resp.status) +
                                 " after " + std::to_string(attempt + 1) +
                                 " attempts for " + target);
    }
    if (backoff.count() > 0) std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }

  std::string ct = detail::to_lower(resp.content_type);
  if (!ct.empty() && ct.rfind("text/html", 0) != 0 &&
      ct.rfind("application/xhtml", 0) != 0)
    fail(errc::non_html_content,
         "content-type '" + resp.content_type + "' for " + target);

  std::string charset = detail::declared_charset(resp.content_type, resp.body);
  std::string html =
      (charset.empty() || charset == "utf-8" || charset == "utf8" ||
       charset == "us-ascii" || charset == "ascii")
          ? detail::utf8_lossy(resp.body)
          : detail::transcode_to_utf8(resp.body, charset);

  ArticleRecord record;
  auto normalized = normalize_url(ref.url);
  if (!normalized)
    fail(errc::transport_error, "unparsable article url: " + ref.url);
  record.id = sha256_hex(*normalized);
  record.taxon = ref.taxon;
  record.url = ref.url;
  record.fetched_url = resp.final_url.empty() ? target : resp.final_url;
  record.seen_date = ref.seen_date;
  record.source_country_raw = ref.source_country;
  record.language = ref.language;
  record.title = ref.title;
  record.text = extract_text(html);
  record.fetched_at = opts.clock ? opts.clock() : system_clock_utc();
  return record;
}

}  // namespace faunawatch
