// Copyright 2026 The Mochi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mochi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MOCHI_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

MOCHI_DEFINE_ERROR(InvalidScene);
MOCHI_DEFINE_ERROR(DegenerateTriangle);
MOCHI_DEFINE_ERROR(EmptySoup);
MOCHI_DEFINE_ERROR(TopologyMismatch);
MOCHI_DEFINE_ERROR(TraversalStackOverflow);
MOCHI_DEFINE_ERROR(NonUniformRadius);
MOCHI_DEFINE_ERROR(MissingExactTest);
MOCHI_DEFINE_ERROR(SelfPair);
MOCHI_DEFINE_ERROR(MemoryBudgetExceeded);
MOCHI_DEFINE_ERROR(ParseError);
MOCHI_DEFINE_ERROR(IndexOutOfRange);
MOCHI_DEFINE_ERROR(UnsupportedFormat);
MOCHI_DEFINE_ERROR(InvalidParams);
MOCHI_DEFINE_ERROR(IncompatibleReduction);
MOCHI_DEFINE_ERROR(TooLargeForOracle);

#undef MOCHI_DEFINE_ERROR

}  // namespace mochi
