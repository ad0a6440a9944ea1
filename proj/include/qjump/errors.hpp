#pragma once

#include <stdexcept>
#include <string>

namespace qjump {

// Exit codes used by the CLI, one per error category.
enum class exit_code : int {
  ok = 0,
  usage = 2,          // bad flags or configuration
  io = 3,             // file system failures
  schema = 4,         // format version mismatch
  missing_input = 5,  // required input file absent
  empty_data = 6,     // empty or degenerate samples
  domain = 7,         // argument outside an operation's domain
};

class error : public std::runtime_error {
public:
  error(exit_code code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  exit_code code() const noexcept { return code_; }

private:
  exit_code code_;
};

#define QJUMP_ERROR_TYPE(Name, Category)                  \
  class Name : public error {                             \
  public:                                                 \
    explicit Name(const std::string& msg)                 \
        : error(exit_code::Category, #Name ": " + msg) {} \
  }

// Domain errors.
QJUMP_ERROR_TYPE(NegativeTime, domain);
QJUMP_ERROR_TYPE(InvalidRate, domain);
QJUMP_ERROR_TYPE(DimensionMismatch, domain);
QJUMP_ERROR_TYPE(NotAProjector, domain);
QJUMP_ERROR_TYPE(NotADensity, domain);
QJUMP_ERROR_TYPE(InsufficientRange, domain);
QJUMP_ERROR_TYPE(InvalidScheme, domain);
QJUMP_ERROR_TYPE(InvalidParams, domain);
QJUMP_ERROR_TYPE(UnsortedGrid, domain);
QJUMP_ERROR_TYPE(InvalidSample, domain);

// Empty or degenerate data.
QJUMP_ERROR_TYPE(EmptyInput, empty_data);
QJUMP_ERROR_TYPE(EmptySample, empty_data);
QJUMP_ERROR_TYPE(SampleTooSmall, empty_data);
QJUMP_ERROR_TYPE(NonPositiveEstimate, empty_data);
QJUMP_ERROR_TYPE(NotBimodal, empty_data);

class DegenerateFit : public error {
public:
  explicit DegenerateFit(const std::string& msg)
      : error(exit_code::empty_data, "DegenerateFit: " + msg) {}

protected:
  DegenerateFit(exit_code code, const std::string& msg) : error(code, msg) {}
};

class NonDecayingSample : public DegenerateFit {
public:
  explicit NonDecayingSample(const std::string& msg)
      : DegenerateFit(exit_code::empty_data, "NonDecayingSample: " + msg) {}
};

// Configuration, files, formats.
QJUMP_ERROR_TYPE(InvalidConfig, usage);
QJUMP_ERROR_TYPE(IoError, io);
QJUMP_ERROR_TYPE(SchemaVersionMismatch, schema);
QJUMP_ERROR_TYPE(MissingInput, missing_input);

#undef QJUMP_ERROR_TYPE

}  // namespace qjump
