#pragma once

#include <functional>

#include "adbn/error.hpp"
#include "doctest.h"

namespace testing_support {

// Code of the adbn::Error raised by f; fails the test when nothing is thrown.
inline adbn::Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const adbn::Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return adbn::Errc::IoError;
}

}  // namespace testing_support
