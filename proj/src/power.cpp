#include "mpicheck/power.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>

#include "mpicheck/errors.hpp"

namespace mpicheck {
namespace {

constexpr std::size_t kRewriteLimit = 1'000'000;

std::uint64_t mul_exp(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw Error(ErrorKind::Overflow, "loop exponent overflow");
  return r;
}

std::uint64_t add_exp(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw Error(ErrorKind::Overflow, "loop exponent overflow");
  return r;
}

bool is_finite(const Power& p) { return p.exp.is_finite(); }

// One iteration of the body as a power string.
PowerString body_of(const Power& p) {
  if (p.is_literal()) return {Power::literal(p.literals)};
  return p.nested;
}

bool starts_with(const std::vector<Symbol>& w, const std::vector<Symbol>& x) {
  return x.size() <= w.size() && std::equal(x.begin(), x.end(), w.begin());
}

// If `prefix` is a structural prefix of `whole`, returns the remainder. The
// last prefix element may cover only the start of a literal element of whole.
std::optional<PowerString> split_prefix(const PowerString& whole, const PowerString& prefix) {
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    if (k >= whole.size()) return std::nullopt;
    if (prefix[k] == whole[k]) continue;
    if (k + 1 != prefix.size()) return std::nullopt;
    const Power& x = prefix[k];
    const Power& w = whole[k];
    if (!x.is_literal() || !w.is_literal() || x.exp != LoopCount::finite(1) || !is_finite(w)) return std::nullopt;
    PowerString rest;
    if (w.exp == LoopCount::finite(1) && starts_with(w.literals, x.literals)) {
      rest.push_back(Power::literal({w.literals.begin() + static_cast<std::ptrdiff_t>(x.literals.size()),
                                     w.literals.end()}));
      if (rest.back().literals.empty()) rest.pop_back();
    } else if (w.literals == x.literals && w.exp.value() > 1) {
      rest.push_back(Power::literal(w.literals, LoopCount::finite(w.exp.value() - 1)));
    } else {
      return std::nullopt;
    }
    rest.insert(rest.end(), whole.begin() + static_cast<std::ptrdiff_t>(k) + 1, whole.end());
    return rest;
  }
  return PowerString(whole.begin() + static_cast<std::ptrdiff_t>(prefix.size()), whole.end());
}

// Local Power Reduction for one element; may splice into several elements.
void reduce_into(const Power& p, PowerString& out) {
  if (p.is_literal()) {
    if (!p.literals.empty()) out.push_back(p);
    return;
  }
  PowerString body = normalize(p.nested);
  if (body.empty()) return;
  if (p.exp.is_infinite()) {
    out.push_back(Power::group(std::move(body), p.exp));
    return;
  }
  if (body.size() == 1 && body.front().exp.is_finite()) {
    Power inner = std::move(body.front());
    inner.exp = LoopCount::finite(mul_exp(inner.exp.value(), p.exp.value()));
    out.push_back(std::move(inner));
    return;
  }
  if (p.exp == LoopCount::finite(1)) {
    out.insert(out.end(), body.begin(), body.end());
    return;
  }
  out.push_back(Power::group(std::move(body), p.exp));
}

// Applies one Left Prefix Reduction if the pattern occurs; returns whether it did.
bool left_prefix_once(PowerString& s) {
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const Power& a = s[i];
    const Power& b = s[i + 1];
    if (!is_finite(a) || !is_finite(b)) continue;
    auto rest = split_prefix(body_of(b), body_of(a));
    if (!rest) continue;

    PowerString replacement;
    Power grown = a;
    if (rest->empty()) {
      // x^p x^q: the whole of b folds into a
      grown.exp = LoopCount::finite(add_exp(a.exp.value(), b.exp.value()));
      replacement.push_back(std::move(grown));
    } else {
      grown.exp = LoopCount::finite(add_exp(a.exp.value(), 1));
      replacement.push_back(std::move(grown));
      replacement.insert(replacement.end(), rest->begin(), rest->end());
      if (b.exp.value() > 1) {
        Power shrunk = b;
        shrunk.exp = LoopCount::finite(b.exp.value() - 1);
        reduce_into(shrunk, replacement);
      }
    }
    s.erase(s.begin() + static_cast<std::ptrdiff_t>(i), s.begin() + static_cast<std::ptrdiff_t>(i) + 2);
    s.insert(s.begin() + static_cast<std::ptrdiff_t>(i), replacement.begin(), replacement.end());
    return true;
  }
  return false;
}

void flatten_into(const PowerString& s, std::vector<Symbol>& out, std::uint64_t& budget);

void flatten_power(const Power& p, std::uint64_t times, std::vector<Symbol>& out, std::uint64_t& budget) {
  for (std::uint64_t k = 0; k < times; ++k) {
    if (p.is_literal()) {
      if (budget < p.literals.size()) throw Error(ErrorKind::SizeExceeded, "unrolled string exceeds the event cap");
      budget -= p.literals.size();
      out.insert(out.end(), p.literals.begin(), p.literals.end());
    } else {
      flatten_into(p.nested, out, budget);
    }
  }
}

void flatten_into(const PowerString& s, std::vector<Symbol>& out, std::uint64_t& budget) {
  for (const Power& p : s) {
    if (p.exp.is_infinite()) throw Error(ErrorKind::InfiniteLoop, "cannot unroll an infinite power");
    flatten_power(p, p.exp.value(), out, budget);
  }
}

void count_into(const PowerString& s, std::uint64_t weight, OccurrenceCount& out);

void count_power_body(const Power& p, std::uint64_t weight, OccurrenceCount& out) {
  if (p.is_literal()) {
    for (const Symbol& sym : p.literals) out[sym] = add_exp(out[sym], weight);
  } else {
    count_into(p.nested, weight, out);
  }
}

void count_into(const PowerString& s, std::uint64_t weight, OccurrenceCount& out) {
  for (const Power& p : s) {
    if (p.exp.is_infinite()) throw Error(ErrorKind::InfiniteInside, "infinite power inside counted string");
    count_power_body(p, mul_exp(weight, p.exp.value()), out);
  }
}

void symbols_into(const PowerString& s, std::vector<Symbol>& order, std::set<Symbol>& seen);

void power_symbols_into(const Power& p, std::vector<Symbol>& order, std::set<Symbol>& seen) {
  if (p.is_literal()) {
    for (const Symbol& sym : p.literals)
      if (seen.insert(sym).second) order.push_back(sym);
  } else {
    symbols_into(p.nested, order, seen);
  }
}

void symbols_into(const PowerString& s, std::vector<Symbol>& order, std::set<Symbol>& seen) {
  for (const Power& p : s) power_symbols_into(p, order, seen);
}

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  return __builtin_mul_overflow(a, b, &r) ? UINT64_MAX : r;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  return __builtin_add_overflow(a, b, &r) ? UINT64_MAX : r;
}

std::uint64_t power_size(const Power& p) {
  std::uint64_t body = p.is_literal() ? p.literals.size() : unrolled_size(p.nested);
  return p.exp.is_infinite() ? UINT64_MAX : sat_mul(body, p.exp.value());
}

}  // namespace

Power Power::literal(std::vector<Symbol> symbols, LoopCount exp) {
  Power p;
  p.literals = std::move(symbols);
  p.exp = exp;
  return p;
}

Power Power::group(PowerString body, LoopCount exp) {
  Power p;
  p.nested = std::move(body);
  p.exp = exp;
  return p;
}

bool Power::is_atomic() const noexcept {
  return is_literal() && literals.size() == 1 && exp == LoopCount::finite(1);
}

PowerString to_power_string(const Statements& body) {
  PowerString out;
  std::vector<Symbol> run;
  auto close_run = [&] {
    if (!run.empty()) out.push_back(Power::literal(std::move(run)));
    run.clear();
  };
  for (const Statement& st : body) {
    if (!st.is_loop()) {
      run.push_back(st.sym);
      continue;
    }
    close_run();
    PowerString inner = to_power_string(st.body);
    if (inner.size() == 1 && inner.front().is_literal() && inner.front().exp == LoopCount::finite(1))
      out.push_back(Power::literal(std::move(inner.front().literals), st.count));
    else
      out.push_back(Power::group(std::move(inner), st.count));
  }
  close_run();
  return out;
}

PowerString normalize(PowerString s) {
  for (std::size_t round = 0; round < kRewriteLimit; ++round) {
    PowerString reduced;
    for (const Power& p : s) reduce_into(p, reduced);
    bool rewrote = left_prefix_once(reduced);
    if (!rewrote && reduced == s) return reduced;
    s = std::move(reduced);
  }
  throw Error(ErrorKind::SizeExceeded, "normalization did not reach a fixpoint");
}

OccurrenceCount body_counts(const Power& p) {
  OccurrenceCount out;
  count_power_body(p, 1, out);
  return out;
}

std::vector<Symbol> body_symbols(const Power& p) {
  std::vector<Symbol> order;
  std::set<Symbol> seen;
  power_symbols_into(p, order, seen);
  return order;
}

OccurrenceCount string_counts(const PowerString& s) {
  OccurrenceCount out;
  count_into(s, 1, out);
  return out;
}

std::vector<Symbol> string_symbols(const PowerString& s) {
  std::vector<Symbol> order;
  std::set<Symbol> seen;
  symbols_into(s, order, seen);
  return order;
}

std::vector<Symbol> flatten(const PowerString& s, std::uint64_t max_events) {
  std::vector<Symbol> out;
  std::uint64_t budget = max_events;
  flatten_into(s, out, budget);
  return out;
}

std::vector<Symbol> flatten_body(const Power& p, std::uint64_t max_events) {
  std::vector<Symbol> out;
  std::uint64_t budget = max_events;
  flatten_power(p, 1, out, budget);
  return out;
}

std::uint64_t unrolled_size(const PowerString& s) {
  std::uint64_t total = 0;
  for (const Power& p : s) total = sat_add(total, power_size(p));
  return total;
}

PowerString expand_once(const Power& p) {
  if (p.is_atomic()) return {p};
  if (p.exp.is_infinite()) throw Error(ErrorKind::InfiniteLoop, "cannot expand an infinite power");
  PowerString out;
  const std::uint64_t n = p.exp.value();
  if (p.is_literal()) {
    if (n > 1) {
      out.push_back(Power::literal(p.literals));
      out.push_back(Power::literal(p.literals, LoopCount::finite(n - 1)));
    } else {
      out.push_back(Power::literal({p.literals.front()}));
      out.push_back(Power::literal({p.literals.begin() + 1, p.literals.end()}));
    }
    return out;
  }
  out = p.nested;
  if (n > 1) out.push_back(Power::group(p.nested, LoopCount::finite(n - 1)));
  return out;
}

std::string to_string(const Power& p) {
  std::ostringstream out;
  bool bare = false;
  if (p.is_literal()) {
    bool short_names = std::all_of(p.literals.begin(), p.literals.end(),
                                   [](const Symbol& s) { return s.name.size() == 1; });
    std::string body;
    for (std::size_t k = 0; k < p.literals.size(); ++k) {
      if (k > 0 && !short_names) body += ' ';
      body += p.literals[k].name;
    }
    bare = p.literals.size() == 1;
    out << (bare ? body : "(" + body + ")");
  } else {
    out << "(" << to_string(p.nested) << ")";
  }
  out << "^";
  if (p.exp.is_infinite())
    out << "inf";
  else
    out << p.exp.value();
  return out.str();
}

std::string to_string(const PowerString& s) {
  std::string out;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k > 0) out += ' ';
    out += to_string(s[k]);
  }
  return out;
}

}  // namespace mpicheck
