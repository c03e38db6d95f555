/*
 * Copyright 2026 The Subseas Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SUBSEAS_ERROR_H_
#define SUBSEAS_ERROR_H_

#include <stdexcept>
#include <string>

namespace subseas {

// Base class for every error raised by the library. The C API maps each
// subclass onto a status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of an operation (e.g. t after t*).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Input data is malformed, incomplete or inconsistent.
class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed CSV row; carries the 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(const std::string& path, size_t line, const std::string& what)
      : DataError(path + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

// Invalid run configuration (bad flags, missing inputs, unknown names).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A corrector attempted to read data that is not observable at issuance.
class LeakageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace subseas

#endif  // SUBSEAS_ERROR_H_
