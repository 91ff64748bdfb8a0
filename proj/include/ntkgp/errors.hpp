#pragma once

#include <stdexcept>
#include <string>

namespace ntkgp {

/// A matrix factorization failed even after the positive-definiteness jitter
/// was applied (ill-conditioned Gram matrix, degenerate hyperparameters, ...).
class ConditioningError : public std::runtime_error {
 public:
  explicit ConditioningError(const std::string& what) : std::runtime_error(what) {}
};

/// A dataset file failed validation (shape, parse, or schema mismatch).
class IngestError : public std::runtime_error {
 public:
  explicit IngestError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ntkgp
