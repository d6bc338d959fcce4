// Copyright 2026 The LayerFuse Authors.
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
#pragma once

namespace layerfuse {

/// Execution policy for the data-parallel kernels. `serial` runs the same
/// loops on one thread and is the reference the OpenMP path is tested against.
enum class Exec { serial, parallel };

}  // namespace layerfuse
