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

#include <string>
#include <vector>

#include "bgop/coder.hpp"
#include "bgop/dataset.hpp"
#include "bgop/model.hpp"

namespace bgop {

struct SequenceEval {
  std::string name;
  int frames = 0;
  int width = 0;
  int height = 0;
  double bits = 0.0;
  double estimated_bits = 0.0;
  double bpp = 0.0;
  double psnr = 0.0;
  double mse = 0.0;
  std::vector<double> frame_psnr;
};

struct EvalResult {
  std::vector<SequenceEval> sequences;
  double bpp = 0.0;   // all bits over all pixels
  double psnr = 0.0;  // from the pixel-weighted mean squared error
  double mse = 0.0;
  bool measured = false;  // bits are .bgp file sizes rather than entropy estimates
};

/// Codes every sequence in round mode. With a coder the bit count is the size
/// of the written .bgp stream, and that stream is decoded and checked against
/// the encoder reconstruction; without one the entropy-model estimate is used.
EvalResult evaluate(const CodecModel& model, const data::FrameDataset& dataset, int gop_size,
                    coder::SymbolCoder* coder = nullptr);

}  // namespace bgop
