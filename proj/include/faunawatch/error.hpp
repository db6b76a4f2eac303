#pragma once

#include <stdexcept>
#include <string>

namespace faunawatch {

// Stable error codes. The CLI prints them as `error:<code>:<message>` so
// scripts can branch on the code without parsing prose.
enum class errc {
  malformed_config,
  empty_family,
  duplicate_taxon,
  invalid_country_code,
  malformed_response,
  window_too_wide,
  transport_error,
  http_error,
  non_html_content,
  empty_document,
  missing_class,
  io_error,
  corrupt_line,
  empty_window,
  unscored_record,
  no_resolved_countries,
  empty_series,
  missing_model,
  no_unlabeled,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::malformed_config: return "MalformedConfig";
    case errc::empty_family: return "EmptyFamily";
    case errc::duplicate_taxon: return "DuplicateTaxon";
    case errc::invalid_country_code: return "InvalidCountryCode";
    case errc::malformed_response: return "MalformedResponse";
    case errc::window_too_wide: return "WindowTooWide";
    case errc::transport_error: return "TransportError";
    case errc::http_error: return "HttpError";
    case errc::non_html_content: return "NonHtmlContent";
    case errc::empty_document: return "EmptyDocument";
    case errc::missing_class: return "MissingClass";
    case errc::io_error: return "IoError";
    case errc::corrupt_line: return "CorruptLine";
    case errc::empty_window: return "EmptyWindow";
    case errc::unscored_record: return "UnscoredRecord";
    case errc::no_resolved_countries: return "NoResolvedCountries";
    case errc::empty_series: return "EmptySeries";
    case errc::missing_model: return "MissingModel";
    case errc::no_unlabeled: return "NoUnlabeled";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  errc code() const { return code_; }
  const char* code_name() const { return errc_name(code_); }

  // One-line machine-parsable form used by the CLI.
  std::string cli_line() const {
    return std::string("error:") + code_name() + ": " + what();
  }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace faunawatch
