// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sticky_dbm {

enum class Errc {
  numerical_failure,
  contract_violation,
  configuration,
  internal_consistency,
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::numerical_failure: return "numerical-failure";
    case Errc::contract_violation: return "contract-violation";
    case Errc::configuration: return "configuration";
    case Errc::internal_consistency: return "internal-consistency";
  }
  return "unknown";
}

/// Library-wide exception. Every throw site in the library uses this type so
/// callers can dispatch on `code()`.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, Errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace sticky_dbm
