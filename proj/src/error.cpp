#include "drilldown/error.hpp"

namespace drilldown {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::AllDocumentsEmpty: return "AllDocumentsEmpty";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::ModelCorpusMismatch: return "ModelCorpusMismatch";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::CorruptModel: return "CorruptModel";
    case ErrorCode::CorruptCorpus: return "CorruptCorpus";
    case ErrorCode::NoQueryWordInVocabulary: return "NoQueryWordInVocabulary";
    case ErrorCode::UnknownTopic: return "UnknownTopic";
    case ErrorCode::UnknownDocument: return "UnknownDocument";
    case ErrorCode::WrongGranularity: return "WrongGranularity";
    case ErrorCode::EmptyAfterFiltering: return "EmptyAfterFiltering";
    case ErrorCode::UnknownDocId: return "UnknownDocId";
    case ErrorCode::NotFiner: return "NotFiner";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnparseableCallNumber: return "UnparseableCallNumber";
    case ErrorCode::EmptyBasemap: return "EmptyBasemap";
    case ErrorCode::InvalidBasemap: return "InvalidBasemap";
    case ErrorCode::ConcurrentMutation: return "ConcurrentMutation";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(detail), code_(code) {}

}  // namespace drilldown
