// Copyright 2026 The bgop Authors
// SPDX-License-Identifier: Apache-2.0
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

#pragma once

#include "bgop/autograd.hpp"
#include "bgop/nn/networks.hpp"

// Bi-directional motion estimation and compensation. Flow fields are stored on
// the current frame's grid and point into a reference (backward warping).
namespace bgop::motion {

using ag::Var;

/// Two displacement fields. Packed layout is (past dx, past dy, future dx, future dy).
struct FlowPair {
  Var past;    // current -> past reference, (B, 2, H, W)
  Var future;  // current -> future reference, (B, 2, H, W)

  Var packed() const;
  static FlowPair unpack(const Var& packed);
};

struct WarpResult {
  Var past;    // warped past reference
  Var future;  // warped future reference
};

/// Runs the pyramid estimator once per reference. References must be decoded frames.
FlowPair estimate_bidirectional_flow(const Var& past_ref, const Var& future_ref,
                                     const Var& current, const nn::FlowPyramid& net);

/// Bilinear backward warp with border clamping.
Var warp(const Var& frame, const Var& flow);

/// mask * past + (1 - mask) * future.
Var fuse(const WarpResult& warped, const Var& mask);

struct Compensation {
  WarpResult warped;
  Var mask;
  Var prediction;
};

/// Warps both references with the decoded flows, predicts the blend mask from the
/// two warped frames and fuses them.
Compensation motion_compensate(const Var& past_ref, const Var& future_ref,
                               const FlowPair& decoded_flow, const nn::MaskUNet& mask_net);

}  // namespace bgop::motion
