#include "faqforge/error.hpp"

namespace faqforge {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::EmptyCorpus: return "EmptyCorpus";
  case ErrorKind::MalformedRecord: return "MalformedRecord";
  case ErrorKind::DuplicateOriginal: return "DuplicateOriginal";
  case ErrorKind::InvalidFraction: return "InvalidFraction";
  case ErrorKind::InsufficientParaphrases: return "InsufficientParaphrases";
  case ErrorKind::EmptyDocument: return "EmptyDocument";
  case ErrorKind::BadHeader: return "BadHeader";
  case ErrorKind::TruncatedStream: return "TruncatedStream";
  case ErrorKind::MissingKeywordSet: return "MissingKeywordSet";
  case ErrorKind::DimensionMismatch: return "DimensionMismatch";
  case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
  case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
  case ErrorKind::EmptyBag: return "EmptyBag";
  case ErrorKind::EmptyIndex: return "EmptyIndex";
  case ErrorKind::NoPositives: return "NoPositives";
  case ErrorKind::NoNegatives: return "NoNegatives";
  case ErrorKind::EmptyRelevantSet: return "EmptyRelevantSet";
  case ErrorKind::BadArchive: return "BadArchive";
  case ErrorKind::MissingArtifact: return "MissingArtifact";
  case ErrorKind::ConfigMismatch: return "ConfigMismatch";
  case ErrorKind::InvalidArgument: return "InvalidArgument";
  case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

} // namespace faqforge
