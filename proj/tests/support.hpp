#pragma once

#include <optional>

#include "lamlab/error.hpp"

namespace lamlab::test {

// Error code thrown by f, or nullopt if it returns normally.
template <class F>
std::optional<ErrorCode> code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace lamlab::test

#define CHECK_CODE(expr, expected) \
  CHECK(::lamlab::test::code_of([&] { (void)(expr); }) == std::optional<::lamlab::ErrorCode>(expected))
