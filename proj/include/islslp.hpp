// SPDX-License-Identifier: Apache-2.0
//
// islslp: low-range-sidelobe symbol-level precoding for MIMO-OFDM ISAC
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

#pragma once

#include "islslp/baseline_precoder.hpp"
#include "islslp/comm_model.hpp"
#include "islslp/config.hpp"
#include "islslp/csv.hpp"
#include "islslp/fft.hpp"
#include "islslp/experiments.hpp"
#include "islslp/mm_optimizer.hpp"
#include "islslp/parallel.hpp"
#include "islslp/polyhedral_projection.hpp"
#include "islslp/radar_metrics.hpp"
#include "islslp/radar_sim.hpp"
#include "islslp/rng.hpp"
#include "islslp/slot_design.hpp"
#include "islslp/socp_subsolver.hpp"
#include "islslp/types.hpp"
