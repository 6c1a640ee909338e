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

#ifndef CONFPARSE_SEQ2SEQ_CHECKPOINT_H_
#define CONFPARSE_SEQ2SEQ_CHECKPOINT_H_

#include <filesystem>
#include <string>

#include "json.hpp"
#include "confparse/seq2seq/model.h"

namespace confparse {

inline constexpr int kCheckpointVersion = 1;

// Versioned JSON: model config, both vocabularies, and every parameter
// flattened row-major. Doubles are written in shortest round-trip form, so
// load(save(m)) reproduces the parameters bit for bit.
nlohmann::json checkpoint_to_json(const Seq2SeqModel& model);
Seq2SeqModel checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const Seq2SeqModel& model, const std::filesystem::path& path,
                     const nlohmann::json& metadata = nlohmann::json::object());
Seq2SeqModel load_checkpoint(const std::filesystem::path& path);

}  // namespace confparse

#endif  // CONFPARSE_SEQ2SEQ_CHECKPOINT_H_
