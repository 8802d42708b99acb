#include "chefshat/engine.hpp"

#include <algorithm>
#include <stdexcept>

namespace chefshat {

namespace {

uint64_t fnv1a(uint64_t h, uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (i * 8)) & 0xFF;
    h *= 0x100000001B3ull;
  }
  return h;
}

bool is_permutation_of_seats(const std::vector<int>& order) {
  if (order.size() != kNumSeats) return false;
  std::array<bool, kNumSeats> seen{};
  for (int s : order) {
    if (s < 0 || s >= kNumSeats || seen[s]) return false;
    seen[s] = true;
  }
  return true;
}

int seat_with_role(const std::array<Role, kNumSeats>& roles, Role r) {
  for (int s = 0; s < kNumSeats; ++s)
    if (roles[s] == r) return s;
  throw std::logic_error("role not present at the table");
}

// Moves the n highest-value (or lowest-value) cards between hands.
// Jokers count as 12; golden transfer order is handled by Hand::take.
void give_extreme_cards(Hand& from, Hand& to, int n, bool highest) {
  for (int moved = 0; moved < n; ++moved) {
    int v = 0;
    if (highest) {
      for (int value = 12; value >= 1; --value)
        if (from.count[value] > 0) {
          v = value;
          break;
        }
    } else {
      for (int value = 1; value <= 12; ++value)
        if (from.count[value] > 0) {
          v = value;
          break;
        }
    }
    if (v == 0) throw std::logic_error("exchange from an empty hand");
    to.add(from.take(static_cast<uint8_t>(v)));
  }
}

int next_active_clockwise(const MatchState& state, int from) {
  for (int k = 1; k <= kNumSeats; ++k) {
    const int seat = (from + k) % kNumSeats;
    if (!state.finished(seat)) return seat;
  }
  throw std::logic_error("no active seat remains");
}

}  // namespace

const char* role_name(Role r) {
  switch (r) {
    case Role::Chef: return "chef";
    case Role::SousChef: return "sous_chef";
    case Role::Waiter: return "waiter";
    case Role::Dishwasher: return "dishwasher";
    case Role::None: return "none";
  }
  return "none";
}

std::string Move::to_string() const {
  switch (kind) {
    case Kind::Pass: return "pass";
    case Kind::JokersAlone:
      return copies == 0 ? "jokers alone (all held)"
                         : "jokers alone x" + std::to_string(copies);
    case Kind::Discard:
      return "discard face " + std::to_string(face) + " x" +
             std::to_string(copies) + (jokers ? " + joker" : "");
  }
  return "?";
}

uint64_t MatchState::hash() const {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const Hand& hand : hands) {
    for (int v = 1; v <= 12; ++v) h = fnv1a(h, hand.count[v]);
    h = fnv1a(h, hand.golden ? 1 : 0);
  }
  h = fnv1a(h, board.face);
  h = fnv1a(h, board.copies);
  h = fnv1a(h, board.jokers);
  for (Role r : roles) h = fnv1a(h, static_cast<uint64_t>(r));
  h = fnv1a(h, static_cast<uint64_t>(turn));
  for (bool p : passed) h = fnv1a(h, p ? 1 : 0);
  for (int s : finished_order) h = fnv1a(h, static_cast<uint64_t>(s) + 1);
  h = fnv1a(h, first_action_pending ? 1 : 0);
  h = fnv1a(h, static_cast<uint64_t>(special));
  h = fnv1a(h, static_cast<uint64_t>(turn_counter));
  h = fnv1a(h, static_cast<uint64_t>(last_discarder + 1));
  h = fnv1a(h, static_cast<uint64_t>(off_board_cards));
  return h;
}

std::array<Role, kNumSeats> assign_roles(
    const std::vector<int>& previous_positions) {
  std::array<Role, kNumSeats> roles{Role::None, Role::None, Role::None,
                                    Role::None};
  if (previous_positions.empty()) return roles;
  if (!is_permutation_of_seats(previous_positions))
    throw std::invalid_argument(
        "assign_roles: positions must be a permutation of the four seats");
  roles[previous_positions[0]] = Role::Chef;
  roles[previous_positions[1]] = Role::SousChef;
  roles[previous_positions[2]] = Role::Waiter;
  roles[previous_positions[3]] = Role::Dishwasher;
  return roles;
}

SpecialAction check_special_action(const std::array<Hand, kNumSeats>& hands,
                                   std::array<Role, kNumSeats>& roles,
                                   Rng& /*rng*/) {
  int holder = -1;
  for (int s = 0; s < kNumSeats; ++s)
    if (hands[s].jokers() == 2) holder = s;
  if (holder < 0) return SpecialAction::NoSpecial;
  if (roles[holder] == Role::Dishwasher) {
    for (Role& r : roles) {
      if (r == Role::Chef)
        r = Role::Dishwasher;
      else if (r == Role::Dishwasher)
        r = Role::Chef;
      else if (r == Role::SousChef)
        r = Role::Waiter;
      else if (r == Role::Waiter)
        r = Role::SousChef;
    }
    return SpecialAction::FoodFight;
  }
  return SpecialAction::DinnerIsServed;
}

void exchange_cards(std::array<Hand, kNumSeats>& hands,
                    const std::array<Role, kNumSeats>& roles,
                    SpecialAction special) {
  for (Role r : roles)
    if (r == Role::None)
      throw std::invalid_argument("exchange_cards: roles not assigned");
  if (special == SpecialAction::DinnerIsServed)
    throw std::invalid_argument(
        "exchange_cards: no exchange when dinner is served");

  Hand& chef = hands[seat_with_role(roles, Role::Chef)];
  Hand& sous = hands[seat_with_role(roles, Role::SousChef)];
  Hand& waiter = hands[seat_with_role(roles, Role::Waiter)];
  Hand& dish = hands[seat_with_role(roles, Role::Dishwasher)];

  give_extreme_cards(dish, chef, 2, /*highest=*/true);
  give_extreme_cards(chef, dish, 2, /*highest=*/true);
  give_extreme_cards(waiter, sous, 1, /*highest=*/false);
  give_extreme_cards(sous, waiter, 1, /*highest=*/true);
}

int initial_player(const std::array<Hand, kNumSeats>& hands) {
  for (int s = 0; s < kNumSeats; ++s)
    if (hands[s].golden) return s;
  throw std::runtime_error("initial_player: golden 11 missing from all hands");
}

MatchState new_match(Rng& rng, const std::vector<int>& previous_positions) {
  MatchState state;
  state.hands = deal(new_shuffled_deck(rng));
  state.roles = assign_roles(previous_positions);
  if (!previous_positions.empty()) {
    state.special = check_special_action(state.hands, state.roles, rng);
    if (state.special != SpecialAction::DinnerIsServed)
      exchange_cards(state.hands, state.roles, state.special);
  }
  state.turn = initial_player(state.hands);
  state.first_action_pending = true;
  return state;
}

std::optional<std::string> validate_move(const MatchState& state, int seat,
                                         const Move& move) {
  if (state.over()) return "match is over";
  if (seat < 0 || seat >= kNumSeats) return "no such seat";
  if (state.finished(seat)) return "seat already finished";
  const Hand& hand = state.hands[seat];

  switch (move.kind) {
    case Move::Kind::Pass:
      if (state.first_action_pending)
        return "first action must lead with 11s, passing not allowed";
      return std::nullopt;

    case Move::Kind::JokersAlone: {
      if (move.copies < 1 || move.copies > 2) return "bad joker count";
      if (state.first_action_pending)
        return "first action must lead with 11s";
      if (hand.jokers() < move.copies) return "insufficient jokers in hand";
      if (!state.board.empty())
        return "jokers alone (value 12) cannot beat cards on the field";
      return std::nullopt;
    }

    case Move::Kind::Discard: {
      if (move.face < 1 || move.face > kMaxFace) return "bad face value";
      if (move.copies < 1 || move.copies > kMaxFace) return "bad copy count";
      if (move.jokers > 1) return "at most one joker per discard";
      if (hand.count[move.face] < move.copies)
        return "insufficient copies in hand";
      if (hand.jokers() < move.jokers) return "insufficient jokers in hand";
      if (state.first_action_pending && move.face != 11)
        return "first action must lead with 11s";
      if (!state.board.empty()) {
        if (move.face >= state.board.face)
          return "face value not lower than the field";
        if (move.total_cards() < state.board.total())
          return "quantity smaller than the field";
      }
      return std::nullopt;
    }
  }
  return "unknown move kind";
}

void apply_move(MatchState& state, int seat, const Move& move) {
  if (seat != state.turn)
    throw std::invalid_argument("apply_move: wrong turn for seat " +
                                std::to_string(seat));
  if (auto why = validate_move(state, seat, move))
    throw std::invalid_argument("apply_move: " + *why);

  ++state.turn_counter;
  Hand& hand = state.hands[seat];

  if (move.kind == Move::Kind::Pass) {
    state.passed[seat] = true;
  } else if (move.kind == Move::Kind::Discard) {
    state.off_board_cards += state.board.total();
    for (int i = 0; i < move.copies; ++i) hand.take(move.face);
    for (int i = 0; i < move.jokers; ++i) hand.take(kJokerValue);
    state.board = BoardGroup{move.face, move.copies, move.jokers};
    state.last_discarder = seat;
    state.first_action_pending = false;
  } else {  // JokersAlone
    state.off_board_cards += state.board.total();
    for (int i = 0; i < move.copies; ++i) hand.take(kJokerValue);
    state.board = BoardGroup{kJokerValue, 0, move.copies};
    state.last_discarder = seat;
    state.first_action_pending = false;
  }

  if (move.is_discard_like() && hand.empty()) {
    state.finished_order.push_back(seat);
    if (state.finished_order.size() == kNumSeats - 1) {
      for (int s = 0; s < kNumSeats; ++s)
        if (!state.finished(s)) {
          state.finished_order.push_back(s);
          break;
        }
      return;  // third hand emptied: match over
    }
  }

  // Finished seats count as permanently passed; once every active seat has
  // passed the pizza is made and the last discarder (or the next active seat
  // clockwise) leads the next one.
  bool all_passed = true;
  for (int s = 0; s < kNumSeats; ++s)
    if (!state.finished(s) && !state.passed[s]) all_passed = false;
  if (all_passed) {
    state.off_board_cards += state.board.total();
    state.board = BoardGroup{};
    state.passed.fill(false);
    const int leader = state.last_discarder;
    state.turn = state.finished(leader) ? next_active_clockwise(state, leader)
                                        : leader;
    return;
  }

  for (int k = 1; k <= kNumSeats; ++k) {
    const int s = (seat + k) % kNumSeats;
    if (!state.finished(s) && !state.passed[s]) {
      state.turn = s;
      return;
    }
  }
  throw std::logic_error("apply_move: no seat can act");
}

std::vector<Move> legal_moves_oracle(const MatchState& state, int seat) {
  std::vector<Move> legal;
  if (state.finished(seat) || state.over()) return legal;
  auto consider = [&](const Move& m) {
    if (!validate_move(state, seat, m)) legal.push_back(m);
  };
  consider(Move::pass());
  for (uint8_t n = 1; n <= 2; ++n) consider(Move::jokers_alone(n));
  for (uint8_t face = 1; face <= kMaxFace; ++face)
    for (uint8_t copies = 1; copies <= kMaxFace; ++copies)
      for (uint8_t jokers = 0; jokers <= 1; ++jokers)
        consider(Move::discard(face, copies, jokers));
  return legal;
}

Move concretize(const Move& move, const Hand& hand) {
  if (move.kind == Move::Kind::JokersAlone && move.copies == 0)
    return Move::jokers_alone(static_cast<uint8_t>(hand.jokers()));
  return move;
}

std::array<double, kStateWidth> observe(const MatchState& state, int seat) {
  std::array<double, kStateWidth> obs{};
  const Hand& hand = state.hands[seat];
  int slot = 0;
  for (int v = 1; v <= 12 && slot < 17; ++v)
    for (int i = 0; i < hand.count[v] && slot < 17; ++i)
      obs[slot++] = v / 13.0;
  slot = 17;
  for (int i = 0; i < state.board.copies && slot < kStateWidth; ++i)
    obs[slot++] = state.board.face / 13.0;
  for (int i = 0; i < state.board.jokers && slot < kStateWidth; ++i)
    obs[slot++] = kJokerValue / 13.0;
  return obs;
}

}  // namespace chefshat
