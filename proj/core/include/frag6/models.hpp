#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "frag6/checksum.hpp"
#include "frag6/reassembly.hpp"
#include "frag6/wire.hpp"

namespace frag6::models {

class UnknownModel : public Error {
 public:
  using Error::Error;
};

enum class ModelKind { ShankarPaxson, ThreeFragment, NewModel };

std::string_view model_name(ModelKind m);

struct OverlapModel {
  ModelKind name{ModelKind::NewModel};
  std::vector<wire::FragmentSpec> specs;  // canonical order
  std::uint32_t expected_extent_units{0};

  auto operator<=>(const OverlapModel&) const = default;
};

enum class Mode : int { Single = 1, RepeatSameId = 2, MultiPacketDistinctIds = 3 };

enum class CaseKind { Model, Rfc9099Exp1, Rfc9099Exp2 };

struct TestCase {
  std::string case_id;
  CaseKind kind{CaseKind::Model};
  OverlapModel model;
  std::vector<std::size_t> arrival_order;  // indices into model.specs
  Mode mode{Mode::Single};
  int repetitions{1};  // sequence replays (RepeatSameId) or packets (MultiPacket)
  std::vector<std::uint32_t> identifications;
};

// Six fragments; the first carries the echo header and three payload units;
// offsets leave unit 4 reachable only through D while C, D and E contest
// the middle. No arrival order reassembles hole-free once whole fragments
// are kept or discarded atomically.
OverlapModel shankar_paxson_model();

// Same six fragments with every offset after A pulled back one unit. The
// hole-free combinations are exactly {A,B,C,F} and {A,B,E,F}.
OverlapModel new_model();

// 44 cases: eleven placements of the middle fragment between a fixed first
// (3 units, echo header) and final (3 units at offset 3) fragment, each with
// M set or clear on the middle fragment and in both send orders.
std::vector<TestCase> three_fragment_model_suite();

// All orderings of the model's fragments, lexicographic. n! entries.
std::vector<std::vector<std::size_t>> permutations(const OverlapModel& model);

struct CampaignSelection {
  bool shankar_paxson{false};
  bool three_fragment{false};
  bool new_model{false};
  bool rfc9099{false};

  static CampaignSelection all();
};

// Deterministic: same selection, modes and seed give byte-identical
// manifests. Modes apply to the permutation-driven models; the
// three-fragment and RFC 9099 cases run single-shot.
std::vector<TestCase> build_campaign(const CampaignSelection& selection,
                                     const std::set<Mode>& modes,
                                     std::uint64_t seed);

struct ConstraintCheck {
  std::string name;
  bool satisfied{false};
  std::string detail;
};

struct ConstraintReport {
  std::vector<ConstraintCheck> checks;

  bool all_satisfied() const;
};

// Verifies the three adjacency properties every overlap model must have:
// a fragment wholly overlapped by a later twin with identical offset and
// length; one partially overlapped by a later fragment with greater offset;
// one overlapped by a later fragment with smaller offset. For the new model
// additionally confirms by simulation that the hole-free outcomes are
// exactly AAABBCCCFFF and AAABBEEEFFF. Returns findings, never throws.
ConstraintReport validate_model_constraints(const OverlapModel& model);

// Reassembled upper-layer content the sender's checksum commits to: for
// each unit the first covering fragment in canonical order. Unit 0 is the
// 8 zero bytes where the upper-layer header will sit.
Bytes canonical_upper_payload(const OverlapModel& model, checksum::Parity parity);
std::string canonical_letters(const OverlapModel& model);

// Reference size of the originally published campaign dataset; recorded in
// the manifest header for reconciliation with regenerated campaigns.
inline constexpr int kReferenceDatasetTotal = 2226;

// Line-delimited manifest: one header record, then one record per case.
std::string manifest_header_line(std::size_t case_count, std::uint64_t seed);
std::string manifest_case_line(const TestCase& c);
void write_manifest(std::ostream& out, const std::vector<TestCase>& cases,
                    std::uint64_t seed);

}  // namespace frag6::models
