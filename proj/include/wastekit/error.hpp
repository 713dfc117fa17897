/* Copyright 2026 The Wastekit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace wastekit {

/// Base class for every error raised by the toolkit on bad input data.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text that is not well-formed (JSON syntax, numeric tokens).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : Error(what), byte_offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

/// Well-formed input that violates the expected layout. `field()` names the
/// offending key, record id or line.
class SchemaError : public Error {
 public:
  SchemaError(std::string field, const std::string& what)
      : Error(what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Inputs that parse but cannot be combined (dangling references,
/// contradicting records, precondition failures).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace wastekit
