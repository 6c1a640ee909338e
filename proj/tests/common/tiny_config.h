// Copyright 2026 The confparse Authors.
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

// A run configuration small enough to go end to end in seconds.

#ifndef CONFPARSE_TESTS_COMMON_TINY_CONFIG_H_
#define CONFPARSE_TESTS_COMMON_TINY_CONFIG_H_

#include "confparse/pipeline/config.h"

namespace confparse::testing {

inline constexpr const char* kTinyConfig = R"(seed = 3
[corpus]
train_size = 300
dev_size = 60
test_size = 50
[model]
embed_dim = 24
hidden_dim = 24
source_min_count = 2
target_min_count = 2
[train]
epochs = 8
learning_rate = 0.01
[perturb]
passes = 4
[decode]
beam_size = 2
topk = 3
entropy_samples = 4
[scorer]
trees = [5]
depths = [2, 3]
cv_folds = 3
[eval]
bootstrap_resamples = 50
[interpret]
proxy_passes = 4
limit = 8
)";

inline RunConfig tiny_config() { return parse_config(kTinyConfig); }

}  // namespace confparse::testing

#endif  // CONFPARSE_TESTS_COMMON_TINY_CONFIG_H_
