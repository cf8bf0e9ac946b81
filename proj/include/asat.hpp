/*
 * Copyright 2026 The ASAT Authors.
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

#ifndef ASAT_ASAT_HPP_
#define ASAT_ASAT_HPP_

#include "asat/adversary.hpp"
#include "asat/autodiff.hpp"
#include "asat/baselines.hpp"
#include "asat/constraint_geometry.hpp"
#include "asat/data.hpp"
#include "asat/errors.hpp"
#include "asat/models.hpp"
#include "asat/parallel.hpp"
#include "asat/rng.hpp"
#include "asat/sensitivity.hpp"
#include "asat/trainer.hpp"

#endif  // ASAT_ASAT_HPP_
