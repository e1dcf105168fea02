#pragma once

#include <stdexcept>
#include <string>

namespace saldet {

/// Base class for every error raised by the toolkit.
class ToolkitError : public std::runtime_error {
public:
    explicit ToolkitError(const std::string& what) : std::runtime_error(what) {}
};

/// Input file could not be read or written.
class IoError : public ToolkitError {
public:
    using ToolkitError::ToolkitError;
};

/// File content is not well-formed (not valid JSON, truncated binary, ...).
class ParseError : public ToolkitError {
public:
    using ToolkitError::ToolkitError;
};

/// Well-formed file whose structure does not match the documented schema
/// (missing required field, unknown field, wrong type).
class SchemaError : public ToolkitError {
public:
    SchemaError(const std::string& what, std::string record_id = {})
        : ToolkitError(what), record_id_(std::move(record_id)) {}

    /// Id of the offending record, empty when the error is not record-scoped.
    const std::string& record_id() const { return record_id_; }

private:
    std::string record_id_;
};

/// Structurally valid data that violates a domain invariant
/// (box outside image, unknown category, duplicate id, count mismatch, ...).
class ValidationError : public ToolkitError {
public:
    ValidationError(const std::string& what, std::string record_id = {})
        : ToolkitError(what), record_id_(std::move(record_id)) {}

    const std::string& record_id() const { return record_id_; }

private:
    std::string record_id_;
};

/// Numeric input outside the mathematical domain of an operation.
class DomainError : public ToolkitError {
public:
    using ToolkitError::ToolkitError;
};

/// Invalid configuration value or combination.
class ConfigError : public ToolkitError {
public:
    using ToolkitError::ToolkitError;
};

/// Loss reduction over an empty candidate list.
class EmptyBatch : public ToolkitError {
public:
    using ToolkitError::ToolkitError;
};

/// Detections from more than one image passed to a per-image operation.
class MixedImages : public ToolkitError {
public:
    using ToolkitError::ToolkitError;
};

/// A recall denominator is zero: no ground truth (or no salient ground
/// truth) in the evaluation set.
class EmptyDenominator : public ToolkitError {
public:
    using ToolkitError::ToolkitError;
};

/// Training set contains no positive anchor.
class NoPositives : public ToolkitError {
public:
    using ToolkitError::ToolkitError;
};

/// Non-finite loss during training; message carries the epoch index.
class DivergedLoss : public ToolkitError {
public:
    DivergedLoss(const std::string& what, int epoch) : ToolkitError(what), epoch_(epoch) {}

    int epoch() const { return epoch_; }

private:
    int epoch_;
};

} // namespace saldet
