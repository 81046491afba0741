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

#include "bgop/evaluate.hpp"

#include "bgop/error.hpp"
#include "bgop/metrics.hpp"
#include "bgop/stream.hpp"

namespace bgop {

EvalResult evaluate(const CodecModel& model, const data::FrameDataset& dataset, int gop_size,
                    coder::SymbolCoder* coder) {
  if (dataset.empty()) throw DataError("evaluation dataset is empty");
  EvalResult out;
  out.measured = coder != nullptr;
  double bits = 0.0, pixels = 0.0, sse = 0.0, samples = 0.0;
  for (const auto& seq : dataset.sequences) {
    if (seq.frames.empty()) continue;
    const auto coding = stream::encode_sequence(seq.frames, model, gop_size);
    SequenceEval e;
    e.name = seq.name;
    e.frames = coding.frame_count();
    e.width = coding.width;
    e.height = coding.height;
    e.estimated_bits = coding.estimated_bits.total();
    e.bits = e.estimated_bits;
    if (coder != nullptr) {
      const auto bytes = stream::write_stream(coding, model, *coder);
      e.bits = 8.0 * static_cast<double>(bytes.size());
      const auto decoded = stream::decode_stream(bytes, model, *coder);
      for (std::size_t t = 0; t < decoded.size(); ++t) {
        if (!bitwise_equal(decoded[t], coding.reconstructed[t])) {
          throw DecodeError("decoded frame differs from the encoder reconstruction", t);
        }
      }
    }
    e.mse = metrics::mse(seq.frames, coding.reconstructed);
    e.psnr = metrics::psnr_from_mse(e.mse);
    e.frame_psnr = metrics::frame_psnr(seq.frames, coding.reconstructed);
    e.bpp = metrics::bpp(e.bits, e.frames, e.height, e.width);
    const double n = static_cast<double>(e.frames) * e.height * e.width;
    bits += e.bits;
    pixels += n;
    sse += e.mse * 3.0 * n;
    samples += 3.0 * n;
    out.sequences.push_back(std::move(e));
  }
  out.bpp = bits / pixels;
  out.mse = sse / samples;
  out.psnr = metrics::psnr_from_mse(out.mse);
  return out;
}

}  // namespace bgop
