//  Copyright 2026 The epochsketch Authors
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

#include "epochsketch/error.hpp"

namespace epochsketch {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kIncompatible: return "incompatible";
    case ErrorCode::kCannotFold: return "cannot-fold";
    case ErrorCode::kBadMagic: return "bad-magic";
    case ErrorCode::kVersionMismatch: return "version-mismatch";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kCorrupt: return "corrupt";
    case ErrorCode::kRange: return "range";
    case ErrorCode::kAlignment: return "alignment";
    case ErrorCode::kClockSkew: return "clock-skew";
    case ErrorCode::kArity: return "arity";
    case ErrorCode::kInconsistentCounts: return "inconsistent-counts";
    case ErrorCode::kInvalidTemplate: return "invalid-template";
    case ErrorCode::kMissingShape: return "missing-shape";
    case ErrorCode::kEmptyReport: return "empty-report";
    case ErrorCode::kSealed: return "sealed";
    case ErrorCode::kGenerator: return "generator";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace epochsketch
