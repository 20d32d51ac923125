/*
 * Copyright 2026 The Actirep Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ACTIREP_COMMON_HPP_
#define ACTIREP_COMMON_HPP_

#include <stdexcept>
#include <string>

namespace actirep {

enum class ErrorCode {
  // ingest
  MalformedRow,
  NonMonotoneTimestamp,
  EmptyFile,
  OutOfRangeScore,
  DuplicateParticipant,
  // signal
  InvalidFilterSpec,
  SequenceTooShort,
  LengthMismatch,
  // actigram
  BadMagic,
  VersionMismatch,
  TruncatedFile,
  // nncore
  ShapeMismatch,
  NotScalarLoss,
  DetachedGraph,
  NonFinite,
  // vae / cnnlstm
  InsufficientData,
  ShapeHeterogeneity,
  DimOutOfRange,
  InsufficientClassData,
  SingleClassData,
  // labels
  MissingSF12,
  // eval
  EmptyClass,
  SingleClassAUC,
  // io / cli
  IoError,
  UsageError,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::NonMonotoneTimestamp: return "NonMonotoneTimestamp";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::OutOfRangeScore: return "OutOfRangeScore";
    case ErrorCode::DuplicateParticipant: return "DuplicateParticipant";
    case ErrorCode::InvalidFilterSpec: return "InvalidFilterSpec";
    case ErrorCode::SequenceTooShort: return "SequenceTooShort";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotScalarLoss: return "NotScalarLoss";
    case ErrorCode::DetachedGraph: return "DetachedGraph";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ShapeHeterogeneity: return "ShapeHeterogeneity";
    case ErrorCode::DimOutOfRange: return "DimOutOfRange";
    case ErrorCode::InsufficientClassData: return "InsufficientClassData";
    case ErrorCode::SingleClassData: return "SingleClassData";
    case ErrorCode::MissingSF12: return "MissingSF12";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::SingleClassAUC: return "SingleClassAUC";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

// Outcome class shared by the generative, supervised and evaluation paths.
enum class BinaryClass { Healthy = 0, Unhealthy = 1 };

inline const char* binary_class_name(BinaryClass label) {
  return label == BinaryClass::Healthy ? "healthy" : "unhealthy";
}

}  // namespace actirep

#endif  // ACTIREP_COMMON_HPP_
