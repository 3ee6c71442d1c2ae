#pragma once

#include <string>

#include "doctest.h"

// Message of the exception thrown by fn, or "" if nothing was thrown.
template <class Ex, class Fn>
std::string thrown_message(Fn&& fn) {
  try {
    fn();
  } catch (const Ex& e) {
    return e.what();
  }
  return "";
}

#define CHECK_THROWS_CONTAINING(Ex, expr, text)                                     \
  do {                                                                              \
    const std::string msg_ = thrown_message<Ex>([&] { (void)(expr); });             \
    INFO("message: " << msg_);                                                      \
    CHECK(msg_.find(text) != std::string::npos);                                    \
  } while (0)
