#pragma once

#include <stdexcept>
#include <string>

namespace i3c {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// ── categories ─────────────────────────────────────────────────────────
// DataError and ProviderError exist so callers (the CLI in particular)
// can map failures to distinct exit codes without enumerating every
// concrete type.

class DataError : public Error {
 public:
  using Error::Error;
};

class ProviderError : public Error {
 public:
  using Error::Error;
};

// ── segmentation / core ────────────────────────────────────────────────

class EmptyInputError : public DataError {
 public:
  using DataError::DataError;
};

// ── relevance ──────────────────────────────────────────────────────────

class DimensionMismatchError : public DataError {
 public:
  using DataError::DataError;
};

class ZeroVectorError : public DataError {
 public:
  using DataError::DataError;
};

// ── providers ──────────────────────────────────────────────────────────

// Replay-mode lookup failed; carries the digest that had no entry.
class ReplayMissError : public ProviderError {
 public:
  explicit ReplayMissError(const std::string& digest)
      : ProviderError("replay miss: no stored response for digest " + digest),
        digest_(digest) {}
  const std::string& digest() const { return digest_; }

 private:
  std::string digest_;
};

// Network-level failure (connect, timeout, malformed body). Retryable.
class TransportError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

// The endpoint answered with a non-2xx status. Not retryable.
class ProviderRefusalError : public ProviderError {
 public:
  ProviderRefusalError(int status, const std::string& body)
      : ProviderError("provider refused request: status " +
                      std::to_string(status) + ": " + body),
        status_(status),
        body_(body) {}
  int status() const { return status_; }
  const std::string& body() const { return body_; }

 private:
  int status_;
  std::string body_;
};

// ── prompts / pipeline ─────────────────────────────────────────────────

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// ── datasets / files ───────────────────────────────────────────────────

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class AnnotationMismatchError : public DataError {
 public:
  using DataError::DataError;
};

class KTooLargeError : public DataError {
 public:
  using DataError::DataError;
};

class NoGroundTruthError : public DataError {
 public:
  using DataError::DataError;
};

class EmptyRecordSetError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace i3c
