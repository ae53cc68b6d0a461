#pragma once

#include <iosfwd>
#include <map>

#include "frag6/models.hpp"
#include "frag6/reassembly.hpp"

namespace frag6::reassembly {

// Replays a campaign case through the simulator the way the runner would
// send it: single pass, the whole sequence repeated into one buffer
// (RepeatSameId), or independent buffers per packet (MultiPacketDistinctIds,
// where all packets share one structural outcome).
std::map<Policy, ReassemblyOutcome> expected_outcomes(const models::TestCase& c);
std::map<Policy, OutcomeClass> expected_classes(const models::TestCase& c);

// Manifest records with per-policy expected outcomes appended.
void write_oracle_table(std::ostream& out,
                        const std::vector<models::TestCase>& cases,
                        std::uint64_t seed);

}  // namespace frag6::reassembly
