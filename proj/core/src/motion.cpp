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

#include "bgop/motion.hpp"

#include <array>

#include "bgop/error.hpp"
#include "bgop/ops.hpp"

namespace bgop::motion {

Var FlowPair::packed() const {
  const std::array<Var, 2> parts{past, future};
  return ops::concat_channels(parts);
}

FlowPair FlowPair::unpack(const Var& packed) {
  if (packed.shape().c != 4) throw ShapeError("packed flow must have 4 channels");
  return {ops::slice_channels(packed, 0, 2), ops::slice_channels(packed, 2, 2)};
}

FlowPair estimate_bidirectional_flow(const Var& past_ref, const Var& future_ref,
                                     const Var& current, const nn::FlowPyramid& net) {
  require_same_shape(past_ref.shape(), current.shape(), "flow estimation (past)");
  require_same_shape(future_ref.shape(), current.shape(), "flow estimation (future)");
  return {net(past_ref, current), net(future_ref, current)};
}

Var warp(const Var& frame, const Var& flow) { return ops::warp(frame, flow); }

Var fuse(const WarpResult& warped, const Var& mask) {
  return ops::fuse(warped.past, warped.future, mask);
}

Compensation motion_compensate(const Var& past_ref, const Var& future_ref,
                               const FlowPair& decoded_flow, const nn::MaskUNet& mask_net) {
  Compensation out;
  out.warped.past = warp(past_ref, decoded_flow.past);
  out.warped.future = warp(future_ref, decoded_flow.future);
  out.mask = mask_net(out.warped.past, out.warped.future);
  out.prediction = fuse(out.warped, out.mask);
  return out;
}

}  // namespace bgop::motion
