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

/* C boundary of the range coder shared library (libbgop_rangecoder). */
#ifndef BGOP_RANGECODER_ABI_H_
#define BGOP_RANGECODER_ABI_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define BGOP_RC_ABI_VERSION 1

#define BGOP_RC_OK 0
#define BGOP_RC_INVALID_ARGUMENT (-1)
#define BGOP_RC_SYMBOL_OUT_OF_RANGE (-2)
#define BGOP_RC_BUFFER_TOO_SMALL (-3)
#define BGOP_RC_DECODE_ERROR (-4)

/*
 * table_data holds one record per symbol, back to back:
 *   symbol_min, symbol_max, cum_freq[0] .. cum_freq[symbol_max - symbol_min + 1]
 * with cum_freq[0] = 0, cum_freq[last] = 65536 and strictly increasing entries.
 * table_len counts int32 values.
 */

int32_t bgop_rc_abi_version(void);

/* On BGOP_RC_OK, *out_len is the number of bytes written. On
 * BGOP_RC_SYMBOL_OUT_OF_RANGE, *error_index is the offending symbol position. */
int32_t bgop_rc_encode(const int32_t* symbols, size_t count, const int32_t* table_data,
                       size_t table_len, uint8_t* out, size_t out_cap, size_t* out_len,
                       size_t* error_index);

/* Decodes exactly `count` symbols. On BGOP_RC_DECODE_ERROR, *error_index is the
 * position of the first symbol that could not be recovered. */
int32_t bgop_rc_decode(const uint8_t* bytes, size_t len, const int32_t* table_data,
                       size_t table_len, size_t count, int32_t* out_symbols, size_t* error_index);

#ifdef __cplusplus
}
#endif

#endif /* BGOP_RANGECODER_ABI_H_ */
