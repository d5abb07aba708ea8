// Copyright 2026 The nvloop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NVLOOP_CONSTANTS_HPP_
#define NVLOOP_CONSTANTS_HPP_

#include <numbers>

namespace nvloop {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kMu0 = 1.25663706212e-6;  // H/m

// NV electron spin.
inline constexpr double kGyromagneticRatio = 2.8024e10;  // Hz/T
inline constexpr double kZeroFieldSplitting = 2.87e9;    // Hz

inline constexpr double kGaussPerTesla = 1e4;

}  // namespace nvloop

#endif  // NVLOOP_CONSTANTS_HPP_
