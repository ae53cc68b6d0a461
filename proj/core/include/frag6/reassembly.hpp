#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "frag6/bytes.hpp"
#include "frag6/wire.hpp"

namespace frag6::reassembly {

class EmptyObservations : public Error {
 public:
  using Error::Error;
};

// Byte-based policies resolve contested bytes pairwise between the current
// owner and the newcomer; fragment-based policies keep or evict whole
// fragments; Rfc5722Strict poisons the buffer on any overlap.
enum class Policy {
  First,
  Last,
  Bsd,
  BsdRight,
  Linux,
  FragFirstWins,
  FragLastWins,
  Rfc5722Strict,
};

inline constexpr std::array<Policy, 8> kAllPolicies = {
    Policy::First,        Policy::Last,         Policy::Bsd,
    Policy::BsdRight,     Policy::Linux,        Policy::FragFirstWins,
    Policy::FragLastWins, Policy::Rfc5722Strict,
};

std::string_view policy_name(Policy p);
std::optional<Policy> policy_from_name(std::string_view name);
bool is_byte_based(Policy p);
bool is_fragment_based(Policy p);

// Half-open range in 8-octet units.
struct UnitRange {
  std::uint32_t begin{0};
  std::uint32_t end{0};

  auto operator<=>(const UnitRange&) const = default;
};

struct Complete {
  Bytes payload;               // reassembled [0, extent) bytes
  std::string letter_string;   // fragment label per payload unit

  auto operator<=>(const Complete&) const = default;
};

struct Incomplete {
  std::vector<UnitRange> holes;
  bool missing_final{false};  // no retained M=0 fragment, extent unknown

  auto operator<=>(const Incomplete&) const = default;
};

enum class DropReason { OverlapStrict, Timeout, NoHeader };

struct Dropped {
  DropReason reason{DropReason::OverlapStrict};

  auto operator<=>(const Dropped&) const = default;
};

using ReassemblyOutcome = std::variant<Complete, Incomplete, Dropped>;

enum class OutcomeClass { Complete, Incomplete, Dropped };

OutcomeClass outcome_class(const ReassemblyOutcome& o);
std::string_view outcome_class_name(OutcomeClass c);
std::string describe(const ReassemblyOutcome& o);

// ip6frag_time default; a modelled parameter, never an actual timer.
inline constexpr double kDefaultTimeoutS = 30.0;

struct Arrival {
  wire::FragmentSpec spec;
  std::size_t index{0};
  Bytes payload;
};

// Accumulates fragments of one identification under one policy. Retention
// happens at insert time; reassemble only reads state, so it can be asked
// repeatedly and with different elapsed times.
class FragmentBuffer {
 public:
  FragmentBuffer(std::uint32_t identification, Policy policy,
                 double timeout_s = kDefaultTimeoutS);

  void insert(const wire::FragmentSpec& spec, Bytes payload);
  ReassemblyOutcome reassemble(double elapsed_s = 0.0) const;

  std::uint32_t identification() const { return identification_; }
  Policy policy() const { return policy_; }
  double timeout_s() const { return timeout_s_; }
  bool poisoned() const { return poisoned_; }
  const std::vector<Arrival>& arrivals() const { return arrivals_; }

  // Arrival indices still holding data (whole fragments for fragment-based
  // policies; any owned bytes for byte-based ones).
  std::vector<std::size_t> retained_indices() const;

 private:
  struct Slice {
    std::uint32_t begin{0};  // bytes
    std::uint32_t end{0};
    std::size_t owner{0};    // arrival index
  };

  void insert_byte_based(const Arrival& a);
  void insert_fragment_based(const Arrival& a);
  std::vector<Slice> coverage() const;

  std::uint32_t identification_;
  Policy policy_;
  double timeout_s_;
  bool poisoned_{false};
  std::vector<Arrival> arrivals_;
  std::vector<std::size_t> retained_;  // fragment-based
  std::vector<Slice> slices_;          // byte-based, disjoint, sorted
};

// Payload a spec stands for on its own: 8 zero bytes where the upper-layer
// header sits, pattern fill for the rest, zeros when no pattern is set.
Bytes synthetic_payload(const wire::FragmentSpec& spec);

// Convenience: run `specs` with their pattern payloads through a fresh
// buffer in the given arrival order (indices into `specs`).
ReassemblyOutcome simulate(const std::vector<wire::FragmentSpec>& specs,
                           const std::vector<std::size_t>& order,
                           Policy policy);

// One campaign case as seen from outside: did the target answer, and what
// did the oracle expect per policy.
struct CaseObservation {
  std::string case_id;
  bool replied{false};
  std::map<Policy, OutcomeClass> oracle;
};

struct PolicyAgreement {
  Policy policy{Policy::First};
  std::size_t matches{0};
  std::size_t total{0};

  auto operator<=>(const PolicyAgreement&) const = default;
};

// Ranks policies by how many observations they explain: a policy explains a
// case when (replied == oracle says Complete). Sorted by matches descending;
// equal counts stay adjacent in enum order so ties are visible, not broken.
std::vector<PolicyAgreement> fingerprint_policy(
    const std::vector<CaseObservation>& observations);

}  // namespace frag6::reassembly
