// Copyright 2026 The axpath Authors
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

#include "axpath/attribution.hpp"
#include "axpath/baselines.hpp"
#include "axpath/dataset.hpp"
#include "axpath/error.hpp"
#include "axpath/fidelity.hpp"
#include "axpath/forward.hpp"
#include "axpath/graph.hpp"
#include "axpath/harness.hpp"
#include "axpath/io.hpp"
#include "axpath/matrix.hpp"
#include "axpath/model.hpp"
#include "axpath/paths.hpp"
#include "axpath/pruned.hpp"
#include "axpath/select.hpp"
#include "axpath/train.hpp"
