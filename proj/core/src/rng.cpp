// Copyright 2026 The metachan Authors
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

#include "metachan/rng.hpp"

namespace metachan {

std::uint64_t SplitMix64::stream_seed(std::uint64_t master_seed, std::uint64_t index) {
  SplitMix64 a(master_seed);
  const std::uint64_t k = a();
  SplitMix64 b(index ^ 0xD1B54A32D192ED03ULL);
  return k ^ b();
}

SplitMix64 SplitMix64::stream(std::uint64_t master_seed, std::uint64_t index) {
  return SplitMix64(stream_seed(master_seed, index));
}

}  // namespace metachan
