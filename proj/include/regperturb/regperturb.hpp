// Copyright 2026 The regperturb Authors
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
#ifndef REGPERTURB_REGPERTURB_HPP_
#define REGPERTURB_REGPERTURB_HPP_

#include "regperturb/calibration.hpp"
#include "regperturb/chow.hpp"
#include "regperturb/csv.hpp"
#include "regperturb/dataset.hpp"
#include "regperturb/error.hpp"
#include "regperturb/fdist.hpp"
#include "regperturb/format.hpp"
#include "regperturb/noise.hpp"
#include "regperturb/ols.hpp"
#include "regperturb/seed.hpp"
#include "regperturb/sidecar.hpp"
#include "regperturb/synth.hpp"
#include "regperturb/theory.hpp"

#endif  // REGPERTURB_REGPERTURB_HPP_
