#pragma once

#include <stdexcept>
#include <string>

namespace qwbc {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad arguments to an operation (n < 2, empty target set, nonpositive c_ij, ...).
class InvalidParameter : public Error {
public:
  using Error::Error;
};

// Config file problems: parse failures and violated schedule rules.
class ConfigError : public Error {
public:
  using Error::Error;
};

// The exact-count ledger would exceed its integer range. Fatal for the run:
// the engine aborts instead of silently wrapping.
class OverflowError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

// A diagnostic was queried on a state where it is undefined, e.g. the balance
// potential once no node has negative balance.
class DiagnosticUnavailable : public Error {
public:
  using Error::Error;
};

}  // namespace qwbc
