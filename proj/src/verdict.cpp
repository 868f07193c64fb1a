#include "mpicheck/verdict.hpp"

#include <sstream>

namespace mpicheck {
namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

std::string symbol_label(const Symbol& s, const Program& names) {
  return s.name + "(" + names.name_of(s.src) + "->" + names.name_of(s.dst) + ")";
}

}  // namespace

const char* witness_kind(const DeadlockWitness& w) {
  return std::visit(overloaded{
                        [](const StuckQueues&) { return "StuckQueues"; },
                        [](const MdgCycle&) { return "MdgCycle"; },
                        [](const UnmatchedTotals&) { return "UnmatchedTotals"; },
                        [](const RatioInconsistency&) { return "RatioInconsistency"; },
                        [](const FppStuck&) { return "FppStuck"; },
                    },
                    w);
}

std::string pair_label(const MatchedPair& p, const Program& names) {
  return p.sym.name + ": " + names.name_of(p.sym.src) + "→" + names.name_of(p.sym.dst) + "#" +
         std::to_string(p.instance);
}

std::string describe(const DeadlockWitness& w, const Program& names) {
  std::ostringstream out;
  std::visit(overloaded{
                 [&](const StuckQueues& s) {
                   out << "no rendezvous possible; remaining events:";
                   for (const auto& [id, events] : s.remaining) {
                     if (events.empty()) continue;
                     out << "\n  " << names.name_of(id) << ":";
                     for (const Symbol& e : events) out << " " << (e.src == id ? "send " : "recv ") << e.name;
                   }
                 },
                 [&](const MdgCycle& c) {
                   out << "dependence cycle over " << c.pairs.size() << " message pairs:";
                   for (const MatchedPair& p : c.pairs) out << " [" << pair_label(p, names) << "]";
                 },
                 [&](const UnmatchedTotals& u) {
                   out << "message " << symbol_label(u.sym, names) << " is sent " << u.sends << " time(s) but received "
                       << u.recvs << " time(s)";
                 },
                 [&](const RatioInconsistency& r) {
                   out << r.reason;
                   for (const RatioEquation& eq : r.equations) {
                     out << "\n  " << to_string(eq);
                     if (!eq.label.empty()) out << "   [" << eq.label << "]";
                   }
                 },
                 [&](const FppStuck& f) {
                   out << "first power pool cannot be reduced or expanded:";
                   for (const auto& [id, text] : f.snapshot) out << "\n  " << names.name_of(id) << ": " << text;
                 },
             },
             w);
  return out.str();
}

}  // namespace mpicheck
