/*
 * Copyright 2026 The uvtex Authors
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

#include <stdexcept>
#include <string>

namespace uvtex {

/// Base of all errors thrown by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Bad arguments, malformed files, violated preconditions.
class InputError : public Error
{
public:
    using Error::Error;
};

/// A numerical procedure could not produce a trustworthy result.
class NumericalError : public Error
{
public:
    using Error::Error;
};

enum class ModelErrc {
    io,
    malformed_header,
    dimension_mismatch,
    index_out_of_range,
    non_finite,
    invalid_uv,
};

class ModelError : public InputError
{
public:
    ModelError(ModelErrc code, const std::string& what) : InputError(what), code_(code) {}

    ModelErrc code() const noexcept { return code_; }

private:
    ModelErrc code_;
};

} // namespace uvtex
