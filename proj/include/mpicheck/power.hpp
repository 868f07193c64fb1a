#pragma once

// Loop powers: a node program as a string of powers (body)^n, e.g.
// ((ac)^2 b^4 (ac)^1)^inf. Bare runs of sends/receives are powers with
// exponent 1.

#include <cstdint>
#include <string>
#include <vector>

#include "mpicheck/model.hpp"

namespace mpicheck {

struct Power;
using PowerString = std::vector<Power>;

struct Power {
  // Literal body; used when `nested` is empty.
  std::vector<Symbol> literals;
  PowerString nested;
  LoopCount exp = LoopCount::finite(1);

  static Power literal(std::vector<Symbol> symbols, LoopCount exp = LoopCount::finite(1));
  static Power group(PowerString body, LoopCount exp = LoopCount::finite(1));

  bool is_literal() const noexcept { return nested.empty(); }
  // A single send/receive with exponent one.
  bool is_atomic() const noexcept;

  friend bool operator==(const Power&, const Power&) = default;
};

PowerString to_power_string(const Statements& body);

// Rewrites to a fixpoint:
//   Power Reduction        (x^p)^q      -> x^(p*q)     and (X)^1 -> X
//   Left Prefix Reduction  x^p (xy)^q   -> x^(p+1) y (xy)^(q-1)
// The body of an infinite power is normalized but never merged with the
// infinite exponent.
PowerString normalize(PowerString s);

// Occurrences in one iteration of the power's body.
OccurrenceCount body_counts(const Power& p);
// Symbols of the body in first-appearance order.
std::vector<Symbol> body_symbols(const Power& p);

OccurrenceCount string_counts(const PowerString& s);
std::vector<Symbol> string_symbols(const PowerString& s);

// Fully unrolled symbol sequence. Throws InfiniteLoop / SizeExceeded.
std::vector<Symbol> flatten(const PowerString& s, std::uint64_t max_events = kDefaultMaxEvents);
std::vector<Symbol> flatten_body(const Power& p, std::uint64_t max_events = kDefaultMaxEvents);

// Number of events after full unrolling; saturates at UINT64_MAX.
std::uint64_t unrolled_size(const PowerString& s);

// Peels one unit off a power: (B)^t -> B (B)^(t-1), (B)^1 -> B, and a
// literal run splits off its first symbol. Atomic powers expand to themselves.
PowerString expand_once(const Power& p);

// "(ac)^2 b^4 (ac)^1"; single-character names are concatenated.
std::string to_string(const PowerString& s);
std::string to_string(const Power& p);

}  // namespace mpicheck
