// Copyright 2026 The t2d Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace t2d {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An asset generator or loader produced an empty catalog.
class EmptyCatalog : public Error {
 public:
  using Error::Error;
};

// An argument falls outside its documented range.
class BadParameter : public Error {
 public:
  using Error::Error;
};

// A file exists but does not follow the expected byte layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

// The underlying filesystem operation failed.
class IoError : public Error {
 public:
  using Error::Error;
};

// Tensor shapes do not match the model contract.
class BadInput : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// The representation map is (numerically) constant, so the sensitivity
// normalizer is zero.
class DegenerateRepresentation : public Error {
 public:
  using Error::Error;
};

}  // namespace t2d
