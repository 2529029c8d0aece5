// SPDX-License-Identifier: Apache-2.0
//
// risac: link-level simulator for repeater-assisted bi-static MIMO ISAC
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


#ifndef RISAC_RISAC_HPP
#define RISAC_RISAC_HPP

#include "channel.hpp"
#include "comm_metrics.hpp"
#include "detector.hpp"
#include "harness.hpp"
#include "oracle.hpp"
#include "precoding.hpp"
#include "propagation.hpp"
#include "random.hpp"
#include "scenario.hpp"
#include "types.hpp"

#endif
