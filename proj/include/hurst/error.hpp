#pragma once

#include <cstddef>
#include <functional>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>

namespace hurst {

/// Argument outside the mathematical domain of an operation.
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure failed to reach its tolerance.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Toeplitz matrix failed the positive-definiteness check.
class not_spd_error : public numeric_error {
 public:
  not_spd_error(std::size_t order, const std::string& what)
      : numeric_error(what), order_(order) {}
  /// 1-based order of the first leading minor that is not positive.
  std::size_t order() const noexcept { return order_; }

 private:
  std::size_t order_;
};

/// Malformed input file.
class parse_error : public std::runtime_error {
 public:
  parse_error(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

using warning_handler = std::function<void(const std::string&)>;

namespace detail {
inline std::mutex& warning_mutex() {
  static std::mutex m;
  return m;
}
inline warning_handler& warning_slot() {
  static warning_handler h = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
  return h;
}
}  // namespace detail

/// Replace the process-wide warning sink; returns the previous one.
inline warning_handler set_warning_handler(warning_handler h) {
  std::lock_guard<std::mutex> lock(detail::warning_mutex());
  return std::exchange(detail::warning_slot(), std::move(h));
}

inline void warn(const std::string& msg) {
  std::lock_guard<std::mutex> lock(detail::warning_mutex());
  if (detail::warning_slot()) detail::warning_slot()(msg);
}

}  // namespace hurst
