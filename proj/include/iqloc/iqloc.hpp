// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef IQLOC_IQLOC_HPP
#define IQLOC_IQLOC_HPP

#include "iqloc/errors.hpp"
#include "iqloc/array_model.hpp"
#include "iqloc/iqi_signal.hpp"
#include "iqloc/linalg.hpp"
#include "iqloc/fim_core.hpp"
#include "iqloc/geometry.hpp"
#include "iqloc/rng.hpp"
#include "iqloc/parallel.hpp"
#include "iqloc/pulse.hpp"
#include "iqloc/oracle.hpp"
#include "iqloc/scenario.hpp"
#include "iqloc/export.hpp"
#include "iqloc/verify.hpp"

#endif
