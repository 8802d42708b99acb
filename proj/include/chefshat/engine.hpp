#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chefshat/cards.hpp"
#include "chefshat/rng.hpp"

namespace chefshat {

constexpr int kStateWidth = 28;  // 17 hand slots + 11 playing-field slots

enum class Role : uint8_t { Chef, SousChef, Waiter, Dishwasher, None };

enum class SpecialAction : uint8_t { NoSpecial, FoodFight, DinnerIsServed };

const char* role_name(Role r);

// One player action. Discard lays `copies` cards of `face` plus optionally a
// joker (which assumes the face value); JokersAlone leads a pizza with jokers
// only (value 12). JokersAlone count 0 is the catalog sentinel for "all
// jokers held" and must be concretized before applying.
struct Move {
  enum class Kind : uint8_t { Pass, Discard, JokersAlone };

  Kind kind = Kind::Pass;
  uint8_t face = 0;
  uint8_t copies = 0;
  uint8_t jokers = 0;

  static Move pass() { return Move{}; }
  static Move discard(uint8_t face, uint8_t copies, uint8_t jokers) {
    return Move{Kind::Discard, face, copies, jokers};
  }
  static Move jokers_alone(uint8_t count) {
    return Move{Kind::JokersAlone, 0, count, 0};
  }

  bool is_discard_like() const { return kind != Kind::Pass; }
  int total_cards() const {
    return kind == Kind::JokersAlone ? copies : copies + jokers;
  }

  bool operator==(const Move&) const = default;
  auto operator<=>(const Move&) const = default;

  std::string to_string() const;
};

// The discard group currently on top of the playing field. Clearing it
// ("making the pizza") starts the next round. face is 12 when jokers lead.
struct BoardGroup {
  uint8_t face = 0;
  uint8_t copies = 0;
  uint8_t jokers = 0;

  int total() const { return copies + jokers; }
  bool empty() const { return total() == 0; }
  bool operator==(const BoardGroup&) const = default;
};

// Full authoritative state of one match.
struct MatchState {
  std::array<Hand, kNumSeats> hands{};
  BoardGroup board{};
  std::array<Role, kNumSeats> roles{Role::None, Role::None, Role::None,
                                    Role::None};
  int turn = 0;
  std::array<bool, kNumSeats> passed{};
  std::vector<int> finished_order;
  bool first_action_pending = true;
  SpecialAction special = SpecialAction::NoSpecial;
  int turn_counter = 0;
  int last_discarder = -1;
  int off_board_cards = 0;  // cards already folded into finished pizzas

  bool finished(int seat) const {
    for (int s : finished_order)
      if (s == seat) return true;
    return false;
  }
  bool over() const { return finished_order.size() == kNumSeats; }
  int cards_in_play() const {
    int n = board.total() + off_board_cards;
    for (const Hand& h : hands) n += h.size();
    return n;
  }
  uint64_t hash() const;
};

// 1st place -> Chef, 2nd -> SousChef, 3rd -> Waiter, 4th -> Dishwasher.
// Empty input (first match of a series) leaves every seat at None.
std::array<Role, kNumSeats> assign_roles(
    const std::vector<int>& previous_positions);

// Two jokers in one hand trigger the special action: FoodFight for the
// Dishwasher (hierarchy inverted, applied to `roles` in place), DinnerIsServed
// for any other role (card exchange skipped). Always evoked when the
// condition holds; rng reserved for pluggable evocation policies.
SpecialAction check_special_action(const std::array<Hand, kNumSeats>& hands,
                                   std::array<Role, kNumSeats>& roles,
                                   Rng& rng);

// Dishwasher's two highest-value cards go to the Chef, the Waiter's single
// lowest goes to the Sous-Chef; both return their own highest-value cards.
// Jokers rank highest (12); the golden copy moves last among equal 11s.
void exchange_cards(std::array<Hand, kNumSeats>& hands,
                    const std::array<Role, kNumSeats>& roles,
                    SpecialAction special);

// Seat holding the golden 11. Throws if no hand holds it.
int initial_player(const std::array<Hand, kNumSeats>& hands);

// Shuffle, deal, roles, special action and exchange in one step: a match
// ready for the golden-11 lead.
MatchState new_match(Rng& rng, const std::vector<int>& previous_positions);

// Rule check for `seat` acting on `state` (turn ownership is checked by
// apply_move, not here). Returns the violation reason, or nullopt when legal.
std::optional<std::string> validate_move(const MatchState& state, int seat,
                                         const Move& move);

// Applies a legal move and advances the match: discards move cards to the
// field, passes are sticky for the pizza, a cleared field starts a new pizza
// led by the last discarder (or the next active seat clockwise if that player
// finished), emptied hands enter finished_order and the match ends when the
// third one does. Throws std::invalid_argument on illegal moves.
void apply_move(MatchState& state, int seat, const Move& move);

// Brute-force legality reference: enumerates the full move grammar and keeps
// what validate_move accepts. Finished seats get the empty set.
std::vector<Move> legal_moves_oracle(const MatchState& state, int seat);

// Resolves the JokersAlone all-held sentinel against a concrete hand.
Move concretize(const Move& move, const Hand& hand);

// 28-value observation: slots 0..16 the seat's hand sorted ascending
// (joker = 12), slots 17..27 the current board group, zero padded, all
// divided by 13.
std::array<double, kStateWidth> observe(const MatchState& state, int seat);

}  // namespace chefshat
