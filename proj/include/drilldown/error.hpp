#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace drilldown {

enum class ErrorCode {
  AllDocumentsEmpty,
  EmptyCorpus,
  InvalidParams,
  ModelCorpusMismatch,
  UnsupportedVersion,
  CorruptModel,
  CorruptCorpus,
  NoQueryWordInVocabulary,
  UnknownTopic,
  UnknownDocument,
  WrongGranularity,
  EmptyAfterFiltering,
  UnknownDocId,
  NotFiner,
  IoError,
  UnparseableCallNumber,
  EmptyBasemap,
  InvalidBasemap,
  ConcurrentMutation,
  NotFound,
  InvalidInput,
};

std::string_view error_name(ErrorCode code) noexcept;

// Domain error carrying a stable, machine-readable name (e.g. "NotFiner").
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace drilldown
