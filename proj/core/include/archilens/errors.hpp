#pragma once

#include <stdexcept>
#include <string>

namespace archilens {

/// Base class for all archilens domain errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// dataset
class MalformedManifest : public Error {
  public:
    using Error::Error;
};
class DuplicateId : public Error {
  public:
    using Error::Error;
};
class EmptyGroup : public Error {
  public:
    using Error::Error;
};
class UnknownGroup : public Error {
  public:
    using Error::Error;
};

// model gateway
class BackendUnavailable : public Error {
  public:
    using Error::Error;
};
class BackendRejected : public Error {
  public:
    using Error::Error;
};
class DimensionMismatch : public Error {
  public:
    using Error::Error;
};
class UnparseableAnswer : public Error {
  public:
    using Error::Error;
};
class EmptyProposal : public Error {
  public:
    using Error::Error;
};

// extractor
class DegenerateDiff : public Error {
  public:
    using Error::Error;
};

// stats
class EmptyInput : public Error {
  public:
    using Error::Error;
};
class InsufficientData : public Error {
  public:
    using Error::Error;
};
class DomainError : public Error {
  public:
    using Error::Error;
};
class ZeroBandwidth : public Error {
  public:
    using Error::Error;
};

// harness / report
class EmptyReport : public Error {
  public:
    using Error::Error;
};
class MalformedConfig : public Error {
  public:
    using Error::Error;
};
class EvaluationFailed : public Error {
  public:
    using Error::Error;
};

}  // namespace archilens
