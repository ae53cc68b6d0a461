#include "frag6/oracle.hpp"

#include <ostream>

#include "manifest_detail.hpp"

namespace frag6::reassembly {

namespace {

ReassemblyOutcome replay(const models::TestCase& c, Policy policy) {
  const auto& specs = c.model.specs;
  switch (c.mode) {
    case models::Mode::RepeatSameId: {
      FragmentBuffer buf(0, policy);
      for (int rep = 0; rep < c.repetitions; ++rep)
        for (std::size_t i : c.arrival_order)
          buf.insert(specs.at(i), synthetic_payload(specs.at(i)));
      return buf.reassemble();
    }
    case models::Mode::Single:
    case models::Mode::MultiPacketDistinctIds:
      // Distinct identifications land in independent buffers, so every
      // packet of a multi-packet case shares one structural outcome.
      return simulate(specs, c.arrival_order, policy);
  }
  return simulate(specs, c.arrival_order, policy);
}

}  // namespace

std::map<Policy, ReassemblyOutcome> expected_outcomes(const models::TestCase& c) {
  std::map<Policy, ReassemblyOutcome> out;
  for (Policy p : kAllPolicies) out.emplace(p, replay(c, p));
  return out;
}

std::map<Policy, OutcomeClass> expected_classes(const models::TestCase& c) {
  std::map<Policy, OutcomeClass> out;
  for (const auto& [p, o] : expected_outcomes(c)) out.emplace(p, outcome_class(o));
  return out;
}

void write_oracle_table(std::ostream& out,
                        const std::vector<models::TestCase>& cases,
                        std::uint64_t seed) {
  out << models::manifest_header_line(cases.size(), seed) << '\n';
  for (const auto& c : cases) {
    auto rec = models::detail::case_record(c);
    nlohmann::ordered_json oracle = nlohmann::ordered_json::object();
    for (const auto& [p, o] : expected_outcomes(c))
      oracle[std::string(policy_name(p))] = describe(o);
    rec["oracle"] = std::move(oracle);
    out << rec.dump() << '\n';
  }
}

}  // namespace frag6::reassembly
