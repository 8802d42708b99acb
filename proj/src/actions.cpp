#include "chefshat/actions.hpp"

#include <cstdio>
#include <stdexcept>

namespace chefshat {

namespace {

int plain_slot(int face, int copies) { return (copies - 1) * 11 + (face - 1); }
int joker_slot(int face, int copies) {
  return kJokerGridBase + (copies - 1) * 11 + (face - 1);
}

}  // namespace

bool structurally_valid(int index) {
  if (index < 0 || index >= kActionCount) return false;
  if (index == kJokersAloneSlot || index == kPassSlot) return true;
  if (index < kJokerGridBase) {
    const int copies = index / 11 + 1;
    const int face = index % 11 + 1;
    return copies <= face;
  }
  const int r = index - kJokerGridBase;
  const int copies = r / 11 + 1;
  const int face = r % 11 + 1;
  return copies <= face;  // q <= 7 holds by grid shape
}

Move decode(int index) {
  if (!structurally_valid(index))
    throw std::out_of_range("decode: structurally invalid action index " +
                            std::to_string(index));
  if (index == kPassSlot) return Move::pass();
  if (index == kJokersAloneSlot) return Move::jokers_alone(0);  // all held
  if (index < kJokerGridBase) {
    return Move::discard(static_cast<uint8_t>(index % 11 + 1),
                         static_cast<uint8_t>(index / 11 + 1), 0);
  }
  const int r = index - kJokerGridBase;
  return Move::discard(static_cast<uint8_t>(r % 11 + 1),
                       static_cast<uint8_t>(r / 11 + 1), 1);
}

int encode(const Move& move) {
  switch (move.kind) {
    case Move::Kind::Pass:
      return kPassSlot;
    case Move::Kind::JokersAlone:
      return kJokersAloneSlot;
    case Move::Kind::Discard: {
      if (move.face < 1 || move.face > 11 || move.copies < 1 ||
          move.copies > move.face)
        throw std::invalid_argument("encode: move outside the catalog grid");
      if (move.jokers == 0) return plain_slot(move.face, move.copies);
      if (move.jokers == 1 && move.copies <= kJokerGridMaxCopies)
        return joker_slot(move.face, move.copies);
      throw std::invalid_argument(
          "encode: joker discard with more than 7 copies is not "
          "catalog-expressible");
    }
  }
  throw std::invalid_argument("encode: unknown move kind");
}

MaskVector possible_actions(const MatchState& state, int seat) {
  MaskVector mask{};
  if (seat < 0 || seat >= kNumSeats) return mask;
  if (state.finished(seat) || state.over()) return mask;
  const Hand& hand = state.hands[seat];
  const bool has_joker = hand.jokers() >= 1;

  if (state.first_action_pending && seat == state.turn) {
    for (int q = 1; q <= hand.count[11]; ++q) {
      mask[plain_slot(11, q)] = 1;
      if (has_joker && q <= kJokerGridMaxCopies) mask[joker_slot(11, q)] = 1;
    }
    return mask;  // pass is not available on the golden-11 lead
  }

  if (state.board.empty()) {
    for (int v = 1; v <= kMaxFace; ++v)
      for (int q = 1; q <= hand.count[v]; ++q) {
        mask[plain_slot(v, q)] = 1;
        if (has_joker && q <= kJokerGridMaxCopies) mask[joker_slot(v, q)] = 1;
      }
    if (has_joker) mask[kJokersAloneSlot] = 1;
  } else {
    const int need = state.board.total();
    for (int v = 1; v < state.board.face && v <= kMaxFace; ++v)
      for (int q = 1; q <= hand.count[v]; ++q) {
        if (q >= need) mask[plain_slot(v, q)] = 1;
        if (has_joker && q <= kJokerGridMaxCopies && q + 1 >= need)
          mask[joker_slot(v, q)] = 1;
      }
  }
  mask[kPassSlot] = 1;
  return mask;
}

int masked_argmax(std::span<const double> values, const MaskVector& mask) {
  if (values.size() != kActionCount)
    throw std::invalid_argument("masked_argmax: expected 200 values");
  int best = -1;
  for (int i = 0; i < kActionCount; ++i) {
    if (!mask[i]) continue;
    if (best < 0 || values[i] > values[best]) best = i;
  }
  if (best < 0) throw std::invalid_argument("masked_argmax: all-zero mask");
  return best;
}

int masked_uniform(const MaskVector& mask, Rng& rng) {
  const int allowed = mask_cardinality(mask);
  if (allowed == 0)
    throw std::invalid_argument("masked_uniform: all-zero mask");
  int pick = static_cast<int>(rng.uniform_int(allowed));
  for (int i = 0; i < kActionCount; ++i) {
    if (!mask[i]) continue;
    if (pick-- == 0) return i;
  }
  throw std::logic_error("masked_uniform: unreachable");
}

int epsilon_greedy(std::span<const double> values, const MaskVector& mask,
                   double epsilon, Rng& rng) {
  if (epsilon < 0.0 || epsilon > 1.0)
    throw std::invalid_argument("epsilon_greedy: epsilon outside [0, 1]");
  if (rng.uniform_double() <= epsilon && epsilon > 0.0)
    return masked_uniform(mask, rng);
  return masked_argmax(values, mask);
}

std::string catalog_hash() {
  uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001B3ull;
    }
  };
  for (int i = 0; i < kActionCount; ++i) {
    mix(std::to_string(i));
    mix(structurally_valid(i) ? decode(i).to_string() : "invalid");
    mix("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::string catalog_csv() {
  std::string out = "index,description\n";
  for (int i = 0; i < kActionCount; ++i) {
    out += std::to_string(i);
    out += ',';
    out += structurally_valid(i) ? decode(i).to_string()
                                 : "invalid (copies exceed face value)";
    out += '\n';
  }
  return out;
}

}  // namespace chefshat
