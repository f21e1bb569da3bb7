// Copyright 2026 The Microtheory Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MTLIB_ERRORS_HPP
#define MTLIB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mt {

// Process exit codes used by the CLI. Every library error maps onto one of
// these so scripted pipelines can branch on the failure class.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitValidation = 2,
  kExitTransport = 3,
  kExitIntegrity = 4,
};

class Error : public std::runtime_error {
 public:
  Error(std::string message, ExitCode code)
      : std::runtime_error(std::move(message)), code_(code) {}
  ExitCode exit_code() const { return code_; }

 private:
  ExitCode code_;
};

// Bad inputs: malformed config, violated preconditions, unusable arguments.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::string message)
      : Error(std::move(message), kExitValidation) {}
};

// Data that parses but contradicts itself: duplicate ids, dangling
// references, count mismatches.
class IntegrityError : public Error {
 public:
  explicit IntegrityError(std::string message)
      : Error(std::move(message), kExitIntegrity) {}
};

// Malformed bytes: a line that is not valid JSON, a truncated index file.
// Carries the 1-based line number when one is known (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(std::string message, std::size_t line = 0)
      : Error(std::move(message), kExitIntegrity), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Remote backend unreachable after retries, or local I/O failed.
class TransportError : public Error {
 public:
  explicit TransportError(std::string message)
      : Error(std::move(message), kExitTransport) {}
};

// The remote rejected the request (HTTP 4xx). Never retried.
class RequestError : public Error {
 public:
  RequestError(std::string message, int status)
      : Error(std::move(message), kExitTransport), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

}  // namespace mt

#endif  // MTLIB_ERRORS_HPP
