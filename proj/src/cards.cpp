#include "chefshat/cards.hpp"

#include <stdexcept>

namespace chefshat {

Card Hand::take(uint8_t value) {
  if (value < 1 || value > 12 || count[value] == 0)
    throw std::logic_error("Hand::take: no such card in hand");
  --count[value];
  Card c{value, false};
  if (value == 11 && golden && count[11] == 0) {
    golden = false;
    c.golden = true;
  }
  return c;
}

Deck canonical_deck() {
  Deck deck;
  deck.reserve(kDeckSize);
  for (uint8_t v = 1; v <= kMaxFace; ++v)
    for (uint8_t copy = 0; copy < v; ++copy)
      deck.push_back(Card{v, v == 11 && copy == 0});
  deck.push_back(Card{kJokerValue, false});
  deck.push_back(Card{kJokerValue, false});
  return deck;
}

Deck new_shuffled_deck(Rng& rng) {
  Deck deck = canonical_deck();
  for (size_t i = deck.size() - 1; i > 0; --i) {
    const size_t j = rng.uniform_int(i + 1);
    std::swap(deck[i], deck[j]);
  }
  return deck;
}

std::array<Hand, kNumSeats> deal(const Deck& deck) {
  if (deck.size() != kDeckSize)
    throw std::invalid_argument("deal: deck must hold 68 cards");
  std::array<Hand, kNumSeats> hands{};
  for (size_t i = 0; i < deck.size(); ++i) hands[i % kNumSeats].add(deck[i]);
  return hands;
}

}  // namespace chefshat
