/*
 * Copyright 2026 The seneca-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seneca {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input: malformed text, out-of-range operand, inconsistent config.
/// The CLI maps these to exit code 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Operand kind or range not accepted by an instruction.
class InvalidOperandError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Memory address or lane index outside the addressed storage.
class BoundsError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Assembly failure, carrying the 1-based source position.
class AssemblyError : public ValidationError {
public:
    AssemblyError(const std::string &msg, std::size_t line, std::size_t column)
            : ValidationError("line " + std::to_string(line) + ", column " +
                      std::to_string(column) + ": " + msg)
            , line_(line)
            , column_(column)
    {
    }

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// File could not be opened, read or written. The CLI maps these to exit code 2.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace seneca
