#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "chefshat/engine.hpp"
#include "chefshat/rng.hpp"

namespace chefshat {

// Fixed 200-slot action catalog.
//   0..120    discard(face v, copies q, no joker), index (q-1)*11 + (v-1)
//   121..197  discard(face v, copies q, one joker), index 121 + (q-1)*11 +
//             (v-1) with q capped at 7 to fit the budget
//   198       all held jokers played alone
//   199       pass
// Slots with q > v can never be dealt and stay structurally invalid.
constexpr int kActionCount = 200;
constexpr int kJokerGridBase = 121;
constexpr int kJokersAloneSlot = 198;
constexpr int kPassSlot = 199;
constexpr int kJokerGridMaxCopies = 7;

using MaskVector = std::array<uint8_t, kActionCount>;

inline int mask_cardinality(const MaskVector& mask) {
  int n = 0;
  for (uint8_t b : mask) n += b;
  return n;
}

// True for slots that decode to a dealable move.
bool structurally_valid(int index);

// Catalog bijection. decode throws std::out_of_range on structurally invalid
// indices; encode throws std::invalid_argument for inexpressible moves
// (q > 7 with a joker). decode(198) carries the all-held sentinel.
Move decode(int index);
int encode(const Move& move);

// Algorithm-2 style validity mask: recomputed arithmetically from the hand
// counts and board group, independent of the brute-force oracle. The first
// action of a match allows only face-11 discards and masks out Pass.
MaskVector possible_actions(const MatchState& state, int seat);

// Argmax over allowed slots; ties break to the lowest index. Throws on an
// all-zero mask.
int masked_argmax(std::span<const double> values, const MaskVector& mask);

// Uniform draw over allowed slots. Throws on an all-zero mask.
int masked_uniform(const MaskVector& mask, Rng& rng);

// With probability epsilon a uniform draw over allowed slots, otherwise the
// masked argmax.
int epsilon_greedy(std::span<const double> values, const MaskVector& mask,
                   double epsilon, Rng& rng);

// Stable hash of the catalog layout, embedded in weight files so mismatched
// action spaces are rejected on load.
std::string catalog_hash();

// Catalog documentation: "index,description" CSV, one row per slot.
std::string catalog_csv();

}  // namespace chefshat
