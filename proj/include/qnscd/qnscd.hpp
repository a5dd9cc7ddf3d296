/* Copyright 2026 The qnscd Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef QNSCD_QNSCD_HPP_
#define QNSCD_QNSCD_HPP_

#include "qnscd/simcore.hpp"
#include "qnscd/pqc.hpp"
#include "qnscd/loss.hpp"
#include "qnscd/dataset.hpp"
#include "qnscd/metric.hpp"
#include "qnscd/gradient.hpp"
#include "qnscd/optimizer.hpp"
#include "qnscd/geometry.hpp"
#include "qnscd/harness.hpp"
#include "qnscd/verify.hpp"

#endif  // QNSCD_QNSCD_HPP_
