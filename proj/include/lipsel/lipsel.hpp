// Copyright 2026 The lipsel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Everything except the JSON layer (lipsel/io.hpp), which needs nlohmann/json.

#pragma once

#include "lipsel/core.hpp"
#include "lipsel/envelope.hpp"
#include "lipsel/geometry.hpp"
#include "lipsel/instances.hpp"
#include "lipsel/linsys.hpp"
#include "lipsel/metricspace.hpp"
#include "lipsel/oracle.hpp"
#include "lipsel/random.hpp"
#include "lipsel/selection.hpp"
#include "lipsel/solvers.hpp"
#include "lipsel/whitney.hpp"
#include "lipsel/bench.hpp"
