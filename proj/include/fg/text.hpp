// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FG_TEXT_HPP_
#define FG_TEXT_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fg {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view text);

// 64-bit FNV-1a. Stable across platforms; used for fixture keys and cache
// addresses, not for anything adversarial.
std::uint64_t fnv1a64(std::string_view data);
std::string fingerprint(std::string_view data);

}  // namespace fg

#endif  // FG_TEXT_HPP_
