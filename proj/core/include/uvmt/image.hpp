/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/include/uvmt/image.hpp
 *
 * Copyright 2026 The uvmt contributors
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

#include <string>

#include "uvmt/tensor.hpp"

namespace uvmt {

/// 8-bit PNG I/O. Loads to H x W x 3 doubles in [0,1] (value / 255);
/// saves with round-half-up quantization.
Tensor load_png(const std::string& path);
void save_png(const std::string& path, const Tensor& image);

/// Single-channel H x W tensor in [0,1] to grayscale PNG.
void save_png_gray(const std::string& path, const Tensor& image);

} // namespace uvmt
