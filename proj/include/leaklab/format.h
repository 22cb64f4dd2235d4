/*
 * Copyright 2026 The leaklab Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef LEAKLAB_FORMAT_H_
#define LEAKLAB_FORMAT_H_

#include <string>
#include <string_view>

namespace leaklab {

// Shortest decimal text that parses back to exactly `v`.
std::string FormatDouble(double v);

// Strict parse of a whole string; returns false on trailing junk.
bool ParseDouble(std::string_view text, double& out);

}  // namespace leaklab

#endif  // LEAKLAB_FORMAT_H_
