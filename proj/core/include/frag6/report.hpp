#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "frag6/models.hpp"
#include "frag6/reassembly.hpp"
#include "frag6/runner.hpp"

namespace frag6::report {

class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

enum class Rfc5722Verdict { Compliant, NonCompliant };

// How a target handled the chain probes: an echo reply means it reassembled
// what it should have dropped; a parameter problem is a drop with a
// diagnostic; anything else counts as a silent drop.
enum class Rfc9099Verdict { CompliantSilent, CompliantDiagnostic, NonCompliantReplied };

std::string_view verdict_name(Rfc5722Verdict v);
std::string_view verdict_name(Rfc9099Verdict v);

Rfc9099Verdict classify_rfc9099(const runner::Observed& observed);

// Inverse of reassembly::describe, down to the class.
reassembly::OutcomeClass outcome_class_from_describe(std::string_view described);

struct ModeCount {
  models::ModelKind model{models::ModelKind::NewModel};
  models::Mode mode{models::Mode::Single};
  int replied{0};
  int total{0};

  bool operator==(const ModeCount&) const = default;
};

struct ComplianceReport {
  std::string target;
  std::vector<ModeCount> reply_matrix;  // model cases only, stable order
  int overlap_cases{0};                 // strict oracle says dropped:overlap
  int overlap_replied{0};
  Rfc5722Verdict rfc5722{Rfc5722Verdict::Compliant};
  std::map<std::string, Rfc9099Verdict> rfc9099;  // case id -> verdict
  std::vector<reassembly::PolicyAgreement> fingerprint;
};

// A target is RFC 5722 non-compliant as soon as one overlap-bearing case
// drew an echo reply. Fingerprinting uses the model cases only.
ComplianceReport aggregate(const std::vector<runner::TestResult>& results,
                           const std::string& target);

// Line-delimited records, one header then one line per result; read_results
// returns exactly what write_results was given.
void write_results(std::ostream& out,
                   const std::vector<runner::TestResult>& results,
                   const std::string& target);
std::vector<runner::TestResult> read_results(std::istream& in);

std::string csv_matrix(const ComplianceReport& report);
std::string human_summary(const ComplianceReport& report);

}  // namespace frag6::report
