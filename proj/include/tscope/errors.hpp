#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tscope {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };
class PreprocessError : public Error { public: using Error::Error; };
class SimilarityError : public Error { public: using Error::Error; };
class ModelError : public Error { public: using Error::Error; };
class TrainingError : public Error { public: using Error::Error; };
class CoverageError : public Error { public: using Error::Error; };
class EvaluationError : public Error { public: using Error::Error; };
class StatisticsError : public Error { public: using Error::Error; };

using WarningHandler = std::function<void(std::string_view)>;

namespace detail {
struct WarningSink {
  std::mutex mutex;
  WarningHandler handler = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
};
inline WarningSink& warning_sink() {
  static WarningSink sink;
  return sink;
}
}  // namespace detail

// Replaces the process-wide warning handler and returns the previous one.
inline WarningHandler set_warning_handler(WarningHandler handler) {
  auto& sink = detail::warning_sink();
  std::lock_guard lock(sink.mutex);
  std::swap(sink.handler, handler);
  return handler;
}

inline void warn(std::string_view message) {
  auto& sink = detail::warning_sink();
  std::lock_guard lock(sink.mutex);
  if (sink.handler) sink.handler(message);
}

// Installs a handler for the lifetime of the object, restoring the old one on exit.
class ScopedWarningHandler {
 public:
  explicit ScopedWarningHandler(WarningHandler handler) : previous_(set_warning_handler(std::move(handler))) {}
  ~ScopedWarningHandler() { set_warning_handler(std::move(previous_)); }
  ScopedWarningHandler(const ScopedWarningHandler&) = delete;
  ScopedWarningHandler& operator=(const ScopedWarningHandler&) = delete;

 private:
  WarningHandler previous_;
};

}  // namespace tscope
