#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nlchart {

/// Machine-readable failure classes. The HTTP layer maps these onto its
/// response codes; everything else just catches nlchart::Error.
enum class Errc {
  kBadCsv,
  kSyntax,
  kUnknownOperation,
  kUnknownRole,
  kInvalidValue,
  kMisaligned,
  kNotFound,
  kTemplate,
  kIo,
};

const char* to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

/// Raised by the canonical action parser; carries the byte offset of the
/// offending character.
class ParseError : public Error {
 public:
  ParseError(Errc code, const std::string& message, std::size_t position)
      : Error(code, message + " at offset " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

}  // namespace nlchart
