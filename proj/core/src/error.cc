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

#include "halloc/error.h"

namespace halloc {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kLengthMismatch: return "length_mismatch";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kExtractorFailure: return "extractor_failure";
    case ErrorCode::kTransport: return "transport";
    case ErrorCode::kProtocol: return "protocol";
    case ErrorCode::kDegenerateRegion: return "degenerate_region";
    case ErrorCode::kZeroVector: return "zero_vector";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kInapplicable: return "inapplicable";
    case ErrorCode::kUnparseable: return "unparseable";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kNotFound: return "not_found";
  }
  return "unknown";
}

void Rethrow(const Error& e, std::string_view context) {
  throw Error(e.code(), std::string(context) + ": " + e.what());
}

}  // namespace halloc
