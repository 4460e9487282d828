#ifndef CWP_ERROR_H_
#define CWP_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cwp {

// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
  kUsage,     // bad flags, bad config, missing input paths
  kData,      // malformed or inconsistent input data
  kEndpoint,  // chat-completion endpoint unreachable or misbehaving
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class EndpointError : public Error {
 public:
  explicit EndpointError(const std::string& what)
      : Error(ErrorKind::kEndpoint, what) {}
};

// Row-level parse failure. line is 1-based and counts the header.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A model answer that could not be mapped onto a label or category.
class UnparseableResponse : public DataError {
 public:
  UnparseableResponse(const std::string& what, std::string raw)
      : DataError(what), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

// Error that names the offending ids (missing annotations, vote ties, ...).
class IdListError : public DataError {
 public:
  IdListError(const std::string& what, std::vector<std::string> ids);
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::vector<std::string> ids_;
};

}  // namespace cwp

#endif  // CWP_ERROR_H_
