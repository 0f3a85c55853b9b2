// Copyright 2026 The PixelRL Authors. All Rights Reserved.
//
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

#ifndef PIXELRL_ERROR_H_
#define PIXELRL_ERROR_H_

#include <stdexcept>
#include <string>

namespace pixelrl {

// Caller passed something that violates an operation's precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

class InvalidActionError : public InvalidArgument {
 public:
  explicit InvalidActionError(const std::string& what) : InvalidArgument(what) {}
};

class ShapeError : public InvalidArgument {
 public:
  explicit ShapeError(const std::string& what) : InvalidArgument(what) {}
};

// Unreadable or malformed input data: images, checkpoints, config files.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A loss, gradient or parameter became non-finite.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pixelrl

#endif  // PIXELRL_ERROR_H_
