/* Copyright 2026 The Halloc Authors. All Rights Reserved.

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

#ifndef HALLOC_ERROR_H_
#define HALLOC_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace halloc {

enum class ErrorCode {
  kInvalidArgument,
  kLengthMismatch,
  kOutOfRange,
  kExtractorFailure,
  kTransport,        // retryable: timeout, refused connection, 5xx
  kProtocol,         // malformed payload; never retried
  kDegenerateRegion,
  kZeroVector,
  kNonFinite,
  kEmptyInput,
  kInapplicable,
  kUnparseable,
  kDivergence,
  kNotFound,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }
  bool retryable() const { return code_ == ErrorCode::kTransport; }

 private:
  ErrorCode code_;
};

// Raised when a phrase extractor fails or returns spans that violate the
// phrase invariants. `offset` is a byte offset into the caption.
class ExtractorError : public Error {
 public:
  ExtractorError(std::size_t offset, const std::string& message)
      : Error(ErrorCode::kExtractorFailure,
              message + " (caption offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Re-throws `e` with `context` prepended to the message, keeping the code.
[[noreturn]] void Rethrow(const Error& e, std::string_view context);

}  // namespace halloc

#endif  // HALLOC_ERROR_H_
