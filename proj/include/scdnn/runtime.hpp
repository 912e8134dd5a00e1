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

#ifndef SCDNN_RUNTIME_HPP_
#define SCDNN_RUNTIME_HPP_

#if defined(__GLIBC__) || defined(__linux__)
#include <malloc.h>
#endif

namespace scdnn {

/// Keeps large activation buffers in the heap instead of fresh mmap
/// regions, so repeated training steps reuse already faulted-in pages.
/// Purely a speed knob; results do not depend on it.
inline void tune_allocator() {
#if defined(M_MMAP_THRESHOLD) && defined(M_TRIM_THRESHOLD)
  mallopt(M_MMAP_THRESHOLD, 512 * 1024 * 1024);
  mallopt(M_TRIM_THRESHOLD, 1024 * 1024 * 1024);
#endif
}

}  // namespace scdnn

#endif  // SCDNN_RUNTIME_HPP_
