#include "frag6/reassembly.hpp"

#include <algorithm>

#include "frag6/checksum.hpp"

namespace frag6::reassembly {

std::string_view policy_name(Policy p) {
  switch (p) {
    case Policy::First: return "first";
    case Policy::Last: return "last";
    case Policy::Bsd: return "bsd";
    case Policy::BsdRight: return "bsd-right";
    case Policy::Linux: return "linux";
    case Policy::FragFirstWins: return "frag-first-wins";
    case Policy::FragLastWins: return "frag-last-wins";
    case Policy::Rfc5722Strict: return "rfc5722-strict";
  }
  return "?";
}

std::optional<Policy> policy_from_name(std::string_view name) {
  for (Policy p : kAllPolicies)
    if (policy_name(p) == name) return p;
  return std::nullopt;
}

bool is_byte_based(Policy p) {
  switch (p) {
    case Policy::First:
    case Policy::Last:
    case Policy::Bsd:
    case Policy::BsdRight:
    case Policy::Linux:
      return true;
    default:
      return false;
  }
}

bool is_fragment_based(Policy p) {
  return p == Policy::FragFirstWins || p == Policy::FragLastWins;
}

OutcomeClass outcome_class(const ReassemblyOutcome& o) {
  if (std::holds_alternative<Complete>(o)) return OutcomeClass::Complete;
  if (std::holds_alternative<Incomplete>(o)) return OutcomeClass::Incomplete;
  return OutcomeClass::Dropped;
}

std::string_view outcome_class_name(OutcomeClass c) {
  switch (c) {
    case OutcomeClass::Complete: return "complete";
    case OutcomeClass::Incomplete: return "incomplete";
    case OutcomeClass::Dropped: return "dropped";
  }
  return "?";
}

std::string describe(const ReassemblyOutcome& o) {
  if (const auto* c = std::get_if<Complete>(&o))
    return "complete:" + c->letter_string;
  if (const auto* i = std::get_if<Incomplete>(&o)) {
    std::string s = "incomplete:";
    for (const auto& h : i->holes)
      s += "[" + std::to_string(h.begin) + "," + std::to_string(h.end) + ")";
    if (i->missing_final) s += "+tail";
    return s;
  }
  const auto& d = std::get<Dropped>(o);
  switch (d.reason) {
    case DropReason::OverlapStrict: return "dropped:overlap";
    case DropReason::Timeout: return "dropped:timeout";
    case DropReason::NoHeader: return "dropped:no-header";
  }
  return "dropped";
}

namespace {

std::uint32_t begin_byte(const Arrival& a) {
  return static_cast<std::uint32_t>(a.spec.offset_units) * wire::kUnitBytes;
}

std::uint32_t end_byte(const Arrival& a) {
  return begin_byte(a) + static_cast<std::uint32_t>(a.payload.size());
}

bool overlaps(const Arrival& a, const Arrival& b) {
  return begin_byte(a) < end_byte(b) && begin_byte(b) < end_byte(a);
}

// Contested byte between the original owner X and the newcomer Y; true when
// Y takes it. Offsets compare in 8-octet units.
bool newcomer_wins(Policy p, const wire::FragmentSpec& x,
                   const wire::FragmentSpec& y) {
  switch (p) {
    case Policy::First:
      return false;
    case Policy::Last:
      return true;
    case Policy::Bsd:
      // Favors the original when its offset is smaller or equal.
      return x.offset_units > y.offset_units;
    case Policy::BsdRight:
      // Favors the newcomer when the original's offset is smaller or equal.
      return x.offset_units <= y.offset_units;
    case Policy::Linux:
      // Favors the original only when its offset is strictly smaller.
      return x.offset_units >= y.offset_units;
    default:
      return false;
  }
}

}  // namespace

FragmentBuffer::FragmentBuffer(std::uint32_t identification, Policy policy,
                               double timeout_s)
    : identification_(identification), policy_(policy), timeout_s_(timeout_s) {}

void FragmentBuffer::insert(const wire::FragmentSpec& spec, Bytes payload) {
  Arrival a{spec, arrivals_.size(), std::move(payload)};
  if (policy_ == Policy::Rfc5722Strict) {
    for (const auto& prior : arrivals_)
      if (overlaps(prior, a)) poisoned_ = true;
  } else if (is_fragment_based(policy_)) {
    insert_fragment_based(a);
  } else {
    insert_byte_based(a);
  }
  arrivals_.push_back(std::move(a));
}

void FragmentBuffer::insert_fragment_based(const Arrival& a) {
  if (policy_ == Policy::FragFirstWins) {
    for (std::size_t idx : retained_)
      if (overlaps(arrivals_[idx], a)) return;  // newcomer discarded whole
    retained_.push_back(a.index);
    return;
  }
  // FragLastWins: overlapped residents are evicted whole.
  std::erase_if(retained_,
                [&](std::size_t idx) { return overlaps(arrivals_[idx], a); });
  retained_.push_back(a.index);
}

void FragmentBuffer::insert_byte_based(const Arrival& a) {
  const std::uint32_t nb = begin_byte(a);
  const std::uint32_t ne = end_byte(a);
  if (nb == ne) return;

  // Sub-ranges of [nb, ne) the newcomer actually takes, and the surviving
  // pieces of the existing slices.
  std::vector<Slice> kept;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> claims{{nb, ne}};

  auto subtract = [](std::vector<std::pair<std::uint32_t, std::uint32_t>>& rs,
                     std::uint32_t b, std::uint32_t e) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    for (auto [rb, re] : rs) {
      if (e <= rb || re <= b) {
        out.emplace_back(rb, re);
        continue;
      }
      if (rb < b) out.emplace_back(rb, b);
      if (e < re) out.emplace_back(e, re);
    }
    rs = std::move(out);
  };

  for (const auto& s : slices_) {
    const std::uint32_t ob = std::max(s.begin, nb);
    const std::uint32_t oe = std::min(s.end, ne);
    if (ob >= oe) {
      kept.push_back(s);
      continue;
    }
    if (newcomer_wins(policy_, arrivals_[s.owner].spec, a.spec)) {
      // Owner loses the contested middle, keeps the flanks.
      if (s.begin < ob) kept.push_back(Slice{s.begin, ob, s.owner});
      if (oe < s.end) kept.push_back(Slice{oe, s.end, s.owner});
    } else {
      kept.push_back(s);
      subtract(claims, ob, oe);
    }
  }

  for (auto [cb, ce] : claims)
    if (cb < ce) kept.push_back(Slice{cb, ce, a.index});
  std::sort(kept.begin(), kept.end(),
            [](const Slice& l, const Slice& r) { return l.begin < r.begin; });
  slices_ = std::move(kept);
}

std::vector<FragmentBuffer::Slice> FragmentBuffer::coverage() const {
  if (is_byte_based(policy_)) return slices_;
  std::vector<Slice> out;
  if (policy_ == Policy::Rfc5722Strict) {
    for (const auto& a : arrivals_)
      if (begin_byte(a) < end_byte(a))
        out.push_back(Slice{begin_byte(a), end_byte(a), a.index});
  } else {
    for (std::size_t idx : retained_) {
      const auto& a = arrivals_[idx];
      if (begin_byte(a) < end_byte(a))
        out.push_back(Slice{begin_byte(a), end_byte(a), a.index});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Slice& l, const Slice& r) { return l.begin < r.begin; });
  return out;
}

std::vector<std::size_t> FragmentBuffer::retained_indices() const {
  if (policy_ == Policy::Rfc5722Strict) {
    std::vector<std::size_t> all;
    if (!poisoned_)
      for (const auto& a : arrivals_) all.push_back(a.index);
    return all;
  }
  if (is_fragment_based(policy_)) {
    auto sorted = retained_;
    std::sort(sorted.begin(), sorted.end());
    return sorted;
  }
  std::vector<std::size_t> owners;
  for (const auto& s : slices_) owners.push_back(s.owner);
  std::sort(owners.begin(), owners.end());
  owners.erase(std::unique(owners.begin(), owners.end()), owners.end());
  return owners;
}

ReassemblyOutcome FragmentBuffer::reassemble(double elapsed_s) const {
  if (policy_ == Policy::Rfc5722Strict && poisoned_)
    return Dropped{DropReason::OverlapStrict};

  const bool past_deadline = elapsed_s > timeout_s_;

  // A fragment-based policy that evicted or refused the header-carrying
  // fragment has nothing to answer with, even if other data tiles the range.
  if (is_fragment_based(policy_)) {
    bool saw_header = false, kept_header = false;
    for (const auto& a : arrivals_) saw_header |= a.spec.carries_upper_header;
    for (std::size_t idx : retained_)
      kept_header |= arrivals_[idx].spec.carries_upper_header;
    if (saw_header && !kept_header) return Dropped{DropReason::NoHeader};
  }

  // Extent comes from the final (M=0) fragment. Fragment-based policies
  // only trust a retained one; byte-based stacks learned the length from
  // the header even if the bytes were later overwritten.
  std::uint32_t extent = 0;
  bool have_final = false;
  auto consider = [&](const Arrival& a) {
    if (!a.spec.m_flag) {
      have_final = true;
      extent = std::max(extent, end_byte(a));
    }
  };
  if (is_fragment_based(policy_)) {
    for (std::size_t idx : retained_) consider(arrivals_[idx]);
  } else {
    for (const auto& a : arrivals_) consider(a);
  }

  const auto slices = coverage();

  if (!have_final) {
    if (past_deadline) return Dropped{DropReason::Timeout};
    Incomplete inc;
    inc.missing_final = true;
    std::uint32_t edge = 0;
    for (const auto& s : slices) {
      if (s.begin > edge)
        inc.holes.push_back(UnitRange{edge / 8, (s.begin + 7) / 8});
      edge = std::max(edge, s.end);
    }
    return inc;
  }

  std::vector<UnitRange> holes;
  std::uint32_t edge = 0;
  for (const auto& s : slices) {
    if (s.begin >= extent) break;
    if (s.begin > edge && edge < extent)
      holes.push_back(UnitRange{edge / 8, (std::min(s.begin, extent) + 7) / 8});
    edge = std::max(edge, std::min(s.end, extent));
  }
  if (edge < extent) holes.push_back(UnitRange{edge / 8, (extent + 7) / 8});

  if (!holes.empty()) {
    if (past_deadline) return Dropped{DropReason::Timeout};
    return Incomplete{std::move(holes), false};
  }

  Complete done;
  done.payload.assign(extent, 0);
  for (const auto& s : slices) {
    const std::uint32_t e = std::min(s.end, extent);
    for (std::uint32_t b = s.begin; b < e; ++b) {
      const auto& a = arrivals_[s.owner];
      done.payload[b] = a.payload[b - begin_byte(a)];
    }
  }

  bool has_header = false;
  for (const auto& a : arrivals_) has_header |= a.spec.carries_upper_header;
  const std::uint32_t first_unit =
      has_header ? wire::kUpperHeaderBytes / wire::kUnitBytes : 0;
  const std::uint32_t extent_units = (extent + 7) / 8;
  auto owner_at = [&](std::uint32_t byte_pos) -> const Arrival* {
    for (const auto& s : slices)
      if (s.begin <= byte_pos && byte_pos < s.end) return &arrivals_[s.owner];
    return nullptr;
  };
  for (std::uint32_t u = first_unit; u < extent_units; ++u) {
    const Arrival* a = owner_at(u * 8);
    done.letter_string.push_back(a ? a->spec.label : '?');
  }
  return done;
}

Bytes synthetic_payload(const wire::FragmentSpec& spec) {
  Bytes payload;
  const std::size_t units = spec.length_units;
  if (spec.carries_upper_header) {
    payload.assign(wire::kUpperHeaderBytes, 0);
    if (spec.pattern && units > 0)
      append(payload, checksum::pattern_fill(*spec.pattern,
                                             checksum::Parity::Odd, units - 1));
  } else if (spec.pattern) {
    payload = checksum::pattern_fill(*spec.pattern, checksum::Parity::Odd, units);
  } else {
    payload.assign(units * wire::kUnitBytes, 0);
  }
  return payload;
}

ReassemblyOutcome simulate(const std::vector<wire::FragmentSpec>& specs,
                           const std::vector<std::size_t>& order,
                           Policy policy) {
  FragmentBuffer buf(0, policy);
  for (std::size_t i : order)
    buf.insert(specs.at(i), synthetic_payload(specs.at(i)));
  return buf.reassemble();
}

std::vector<PolicyAgreement> fingerprint_policy(
    const std::vector<CaseObservation>& observations) {
  if (observations.empty())
    throw EmptyObservations("fingerprint_policy: no observations");
  std::vector<PolicyAgreement> ranking;
  for (Policy p : kAllPolicies) {
    PolicyAgreement pa;
    pa.policy = p;
    for (const auto& obs : observations) {
      auto it = obs.oracle.find(p);
      if (it == obs.oracle.end()) continue;
      ++pa.total;
      const bool expect_reply = it->second == OutcomeClass::Complete;
      if (expect_reply == obs.replied) ++pa.matches;
    }
    ranking.push_back(pa);
  }
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const PolicyAgreement& l, const PolicyAgreement& r) {
                     return l.matches > r.matches;
                   });
  return ranking;
}

}  // namespace frag6::reassembly
