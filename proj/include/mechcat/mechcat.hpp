// Copyright 2026 The mechcat Authors
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

// Numerical core. The runner layer (config.hpp, presets.hpp, runner.hpp)
// additionally needs fmt, OpenSSL and Boost.PropertyTree.

#include "mechcat/analysis.hpp"
#include "mechcat/errors.hpp"
#include "mechcat/fock.hpp"
#include "mechcat/lindblad.hpp"
#include "mechcat/protocol.hpp"
#include "mechcat/version.hpp"
