/* Copyright 2026 The Seafuse Authors. All Rights Reserved.

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

#ifndef SEAFUSE_MODALITY_H_
#define SEAFUSE_MODALITY_H_

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace seafuse {

enum class Modality : uint8_t { kRgb = 0, kThermal = 1, kLidar = 2 };

inline constexpr int kNumModalities = 3;
inline constexpr std::array<Modality, kNumModalities> kAllModalities = {
    Modality::kRgb, Modality::kThermal, Modality::kLidar};

const char* ModalityName(Modality m);

// Throws std::invalid_argument for names other than rgb, thermal, lidar.
Modality ParseModality(std::string_view name);

// Small bitset over modalities; bit i corresponds to Modality(i).
class ModalitySet {
 public:
  constexpr ModalitySet() = default;
  constexpr explicit ModalitySet(uint8_t bits) : bits_(bits & kFullBits) {}
  constexpr ModalitySet(std::initializer_list<Modality> ms) {
    for (Modality m : ms) Insert(m);
  }

  static constexpr ModalitySet None() { return ModalitySet(); }
  static constexpr ModalitySet All() { return ModalitySet(kFullBits); }

  constexpr bool Contains(Modality m) const {
    return bits_ & (1u << static_cast<uint8_t>(m));
  }
  constexpr void Insert(Modality m) {
    bits_ |= static_cast<uint8_t>(1u << static_cast<uint8_t>(m));
  }
  constexpr ModalitySet Complement() const {
    return ModalitySet(static_cast<uint8_t>(~bits_ & kFullBits));
  }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr uint8_t bits() const { return bits_; }
  int size() const;

  // Comma-separated names in modality order, e.g. "thermal,lidar".
  std::string ToString() const;
  // Parses the ToString() format. Empty string yields the empty set.
  static ModalitySet Parse(std::string_view text);

  constexpr bool operator==(const ModalitySet&) const = default;

 private:
  static constexpr uint8_t kFullBits = (1u << kNumModalities) - 1;
  uint8_t bits_ = 0;
};

}  // namespace seafuse

#endif  // SEAFUSE_MODALITY_H_
