/*
 * Copyright (c) 2026, The abspec Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <abspec/builtins.hpp>
#include <abspec/core_math.hpp>
#include <abspec/errors.hpp>
#include <abspec/ib_solver.hpp>
#include <abspec/io.hpp>
#include <abspec/matrix.hpp>
#include <abspec/random.hpp>
#include <abspec/rd_solver.hpp>
#include <abspec/report.hpp>
#include <abspec/spectral.hpp>
#include <abspec/svg.hpp>
#include <abspec/sweep.hpp>
