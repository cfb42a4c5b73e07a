#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace districtsim {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A physical parameter is outside its valid domain (non-positive area, U-value, ...).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// The 5R1C network cannot be built, e.g. opaque conductance >= mass coupling.
class DegenerateNetwork : public Error {
 public:
  using Error::Error;
};

/// Non-finite value reached a numerical kernel.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// District-heating graph is not a tree rooted at one source.
class TopologyError : public Error {
 public:
  using Error::Error;
};

/// Scenario or configuration file violates its schema. `where()` is the JSON
/// pointer (or file:line) of the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string where, const std::string& what)
      : Error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// Time-series input (weather, appliance profile) could not be ingested.
/// `row()` is 1-based and counts the header line; 0 means "whole file".
class IngestionError : public Error {
 public:
  IngestionError(std::size_t row, const std::string& what)
      : Error(row == 0 ? what : "row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Wire frame could not be decoded. `offset()` is the byte offset into the frame.
class DecodeError : public Error {
 public:
  DecodeError(std::size_t offset, const std::string& what)
      : Error("byte " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Co-simulation protocol violation (missing port value, unexpected frame, ...).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Socket-level failure or timeout.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// A result file could not be written. The message names the path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A co-simulation run aborted. Carries the communication step and the
/// simulator that failed so the caller can attribute the error.
class SimulationError : public Error {
 public:
  SimulationError(std::size_t step, std::string simulator, const std::string& what)
      : Error("step " + std::to_string(step) + ", simulator '" + simulator + "': " + what),
        step_(step),
        simulator_(std::move(simulator)) {}
  std::size_t step() const noexcept { return step_; }
  const std::string& simulator() const noexcept { return simulator_; }

 private:
  std::size_t step_;
  std::string simulator_;
};

}  // namespace districtsim
