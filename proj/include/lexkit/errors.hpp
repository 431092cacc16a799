#pragma once

#include <stdexcept>
#include <string>

namespace lexkit {

// Base for all toolkit errors so callers can catch the whole family at once.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define LEXKIT_DEFINE_ERROR(Name)                                  \
  struct Name : Error {                                            \
    explicit Name(const std::string& what = #Name) : Error(what) {} \
  }

// corpus
LEXKIT_DEFINE_ERROR(NoAnchorsFound);
LEXKIT_DEFINE_ERROR(UnknownElementKey);

// elements
LEXKIT_DEFINE_ERROR(UnparseableDuration);

// clients
LEXKIT_DEFINE_ERROR(EmptyText);
LEXKIT_DEFINE_ERROR(Timeout);
LEXKIT_DEFINE_ERROR(EndpointError);
LEXKIT_DEFINE_ERROR(MalformedResponse);

// augment
LEXKIT_DEFINE_ERROR(UnknownTemplate);
LEXKIT_DEFINE_ERROR(UnresolvedPlaceholder);
LEXKIT_DEFINE_ERROR(NoParsableArray);

// policy
LEXKIT_DEFINE_ERROR(UnknownToken);
LEXKIT_DEFINE_ERROR(EmptyDataset);
LEXKIT_DEFINE_ERROR(DivergenceDetected);

// grpo
LEXKIT_DEFINE_ERROR(GroupTooSmall);
LEXKIT_DEFINE_ERROR(SupportMismatch);
LEXKIT_DEFINE_ERROR(NonFiniteRatio);

// retrieve
LEXKIT_DEFINE_ERROR(EmptyTruth);
LEXKIT_DEFINE_ERROR(MissingAugmentedDescriptions);

// metrics
LEXKIT_DEFINE_ERROR(EmptyAfterTokenization);
LEXKIT_DEFINE_ERROR(UnknownGroupLabel);

// pipeline
LEXKIT_DEFINE_ERROR(ConfigInvalid);

struct StageFailed : Error {
  std::string stage;
  StageFailed(std::string stage_name, const std::string& cause)
      : Error("stage '" + stage_name + "' failed: " + cause), stage(std::move(stage_name)) {}
};

#undef LEXKIT_DEFINE_ERROR

}  // namespace lexkit
