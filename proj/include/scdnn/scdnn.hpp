/* Copyright 2026 The SCDNN Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Convenience header pulling in the whole library.

#ifndef SCDNN_SCDNN_HPP_
#define SCDNN_SCDNN_HPP_

#include "scdnn/activity.hpp"
#include "scdnn/autodiff.hpp"
#include "scdnn/baselines.hpp"
#include "scdnn/butterworth.hpp"
#include "scdnn/layers.hpp"
#include "scdnn/metrics.hpp"
#include "scdnn/model.hpp"
#include "scdnn/preprocess.hpp"
#include "scdnn/runtime.hpp"
#include "scdnn/synthgen.hpp"
#include "scdnn/tensor.hpp"
#include "scdnn/trainer.hpp"

#endif  // SCDNN_SCDNN_HPP_
