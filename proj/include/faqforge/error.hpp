#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace faqforge {

enum class ErrorKind {
  EmptyCorpus,
  MalformedRecord,
  DuplicateOriginal,
  InvalidFraction,
  InsufficientParaphrases,
  EmptyDocument,
  BadHeader,
  TruncatedStream,
  MissingKeywordSet,
  DimensionMismatch,
  EmptyTrainingSet,
  NonFiniteLoss,
  EmptyBag,
  EmptyIndex,
  NoPositives,
  NoNegatives,
  EmptyRelevantSet,
  BadArchive,
  MissingArtifact,
  ConfigMismatch,
  InvalidArgument,
  Io,
};

// Stable machine-readable name, e.g. "MalformedRecord".
std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace faqforge
