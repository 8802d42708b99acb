#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "chefshat/rng.hpp"

namespace chefshat {

constexpr int kNumSeats = 4;
constexpr int kDeckSize = 68;
constexpr int kHandSize = 17;
constexpr uint8_t kJokerValue = 12;  // a joker played alone counts as 12
constexpr uint8_t kMaxFace = 11;

// One ingredient card. value 1..11 for rank cards, 12 for a joker.
// Exactly one rank-11 card in the deck is golden; its holder leads the match.
struct Card {
  uint8_t value = 0;
  bool golden = false;

  bool is_joker() const { return value == kJokerValue; }
  bool operator==(const Card&) const = default;
};

// A player's cards as a multiset. count[v] holds the copies of value v
// (v = 12 counts jokers); the golden 11 is included in count[11] with the
// flag marking which hand owns it.
struct Hand {
  std::array<uint8_t, 13> count{};
  bool golden = false;

  int size() const {
    int n = 0;
    for (int v = 1; v <= 12; ++v) n += count[v];
    return n;
  }
  bool empty() const { return size() == 0; }
  int jokers() const { return count[kJokerValue]; }

  void add(Card c) {
    ++count[c.value];
    if (c.golden) golden = true;
  }

  // Removes one card of the given value. Among equal-value 11s the golden
  // copy leaves last, so transfers stay deterministic.
  Card take(uint8_t value);

  bool operator==(const Hand&) const = default;
};

using Deck = std::vector<Card>;

// The canonical 68-card deck: v copies of each face value v (lower values
// are rarer), two jokers, one golden 11.
Deck canonical_deck();

// Fisher-Yates permutation of the canonical deck.
Deck new_shuffled_deck(Rng& rng);

// 17 cards per seat, dealt round-robin in deck order.
std::array<Hand, kNumSeats> deal(const Deck& deck);

}  // namespace chefshat
