#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slidegraph {

enum class ErrorKind {
  usage,           // bad arguments / configuration
  not_found,       // missing file or directory
  io,              // read/write failure
  unexpected_eof,  // truncated file
  bad_magic,
  unsupported_version,
  checksum,
  format,          // structurally invalid file contents
  data,            // bad user data (malformed input, empty graph, ...)
  invariant,       // internal invariant violation
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::not_found: return "not found";
    case ErrorKind::io: return "i/o";
    case ErrorKind::unexpected_eof: return "unexpected end of file";
    case ErrorKind::bad_magic: return "bad magic";
    case ErrorKind::unsupported_version: return "unsupported version";
    case ErrorKind::checksum: return "checksum mismatch";
    case ErrorKind::format: return "format";
    case ErrorKind::data: return "data";
    case ErrorKind::invariant: return "invariant violation";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace slidegraph
