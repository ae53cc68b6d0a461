#include "frag6/report.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace frag6::report {

namespace {

using nlohmann::ordered_json;

constexpr std::string_view kSchema = "frag6lab/results/1";

std::string_view kind_name(models::CaseKind k) {
  switch (k) {
    case models::CaseKind::Model: return "model";
    case models::CaseKind::Rfc9099Exp1: return "rfc9099-exp1";
    case models::CaseKind::Rfc9099Exp2: return "rfc9099-exp2";
  }
  return "?";
}

models::CaseKind kind_from_name(std::string_view name) {
  for (auto k : {models::CaseKind::Model, models::CaseKind::Rfc9099Exp1,
                 models::CaseKind::Rfc9099Exp2})
    if (kind_name(k) == name) return k;
  throw SchemaMismatch("unknown case kind: " + std::string(name));
}

models::ModelKind model_from_name(std::string_view name) {
  for (auto m : {models::ModelKind::ShankarPaxson, models::ModelKind::ThreeFragment,
                 models::ModelKind::NewModel})
    if (models::model_name(m) == name) return m;
  throw SchemaMismatch("unknown model: " + std::string(name));
}

bool replied(const runner::TestResult& r) {
  return r.observed.cls == runner::ObservedClass::EchoReply;
}

}  // namespace

std::string_view verdict_name(Rfc5722Verdict v) {
  return v == Rfc5722Verdict::Compliant ? "compliant" : "non-compliant";
}

std::string_view verdict_name(Rfc9099Verdict v) {
  switch (v) {
    case Rfc9099Verdict::CompliantSilent: return "compliant-silent";
    case Rfc9099Verdict::CompliantDiagnostic: return "compliant-diagnostic";
    case Rfc9099Verdict::NonCompliantReplied: return "non-compliant-replied";
  }
  return "?";
}

Rfc9099Verdict classify_rfc9099(const runner::Observed& observed) {
  switch (observed.cls) {
    case runner::ObservedClass::EchoReply:
      return Rfc9099Verdict::NonCompliantReplied;
    case runner::ObservedClass::ParamProblem:
      return Rfc9099Verdict::CompliantDiagnostic;
    default:
      return Rfc9099Verdict::CompliantSilent;
  }
}

reassembly::OutcomeClass outcome_class_from_describe(std::string_view described) {
  const auto head = described.substr(0, described.find(':'));
  if (head == "complete") return reassembly::OutcomeClass::Complete;
  if (head == "incomplete") return reassembly::OutcomeClass::Incomplete;
  if (head == "dropped") return reassembly::OutcomeClass::Dropped;
  throw SchemaMismatch("unrecognized outcome: " + std::string(described));
}

ComplianceReport aggregate(const std::vector<runner::TestResult>& results,
                           const std::string& target) {
  ComplianceReport report;
  report.target = target;

  std::map<std::pair<int, int>, ModeCount> matrix;
  std::vector<reassembly::CaseObservation> observations;
  for (const auto& r : results) {
    if (r.kind != models::CaseKind::Model) {
      report.rfc9099.emplace(r.case_id, classify_rfc9099(r.observed));
      continue;
    }
    auto& cell = matrix[{static_cast<int>(r.model), static_cast<int>(r.mode)}];
    cell.model = r.model;
    cell.mode = r.mode;
    cell.total += 1;
    cell.replied += replied(r) ? 1 : 0;

    const auto strict = r.oracle.find(reassembly::Policy::Rfc5722Strict);
    if (strict != r.oracle.end() && strict->second == "dropped:overlap") {
      report.overlap_cases += 1;
      report.overlap_replied += replied(r) ? 1 : 0;
    }

    reassembly::CaseObservation obs;
    obs.case_id = r.case_id;
    obs.replied = replied(r);
    for (const auto& [policy, described] : r.oracle)
      obs.oracle.emplace(policy, outcome_class_from_describe(described));
    observations.push_back(std::move(obs));
  }

  for (auto& [key, cell] : matrix) report.reply_matrix.push_back(cell);
  report.rfc5722 = report.overlap_replied > 0 ? Rfc5722Verdict::NonCompliant
                                              : Rfc5722Verdict::Compliant;
  if (!observations.empty())
    report.fingerprint = reassembly::fingerprint_policy(observations);
  return report;
}

void write_results(std::ostream& out,
                   const std::vector<runner::TestResult>& results,
                   const std::string& target) {
  ordered_json header;
  header["record"] = "header";
  header["schema"] = std::string(kSchema);
  header["target"] = target;
  header["cases"] = results.size();
  out << header.dump() << '\n';

  for (const auto& r : results) {
    ordered_json j;
    j["record"] = "result";
    j["case_id"] = r.case_id;
    j["kind"] = std::string(kind_name(r.kind));
    j["model"] = std::string(models::model_name(r.model));
    j["mode"] = static_cast<int>(r.mode);
    ordered_json obs;
    obs["class"] = std::string(runner::observed_name(r.observed.cls));
    if (r.observed.icmp_type) obs["icmp_type"] = *r.observed.icmp_type;
    if (r.observed.icmp_code) obs["icmp_code"] = *r.observed.icmp_code;
    j["observed"] = std::move(obs);
    ordered_json oracle = ordered_json::object();
    for (const auto& [policy, described] : r.oracle)
      oracle[std::string(reassembly::policy_name(policy))] = described;
    j["oracle"] = std::move(oracle);
    out << j.dump() << '\n';
  }
}

std::vector<runner::TestResult> read_results(std::istream& in) {
  std::vector<runner::TestResult> results;
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaMismatch(std::string("bad results line: ") + e.what());
    }
    const std::string record = j.value("record", "");
    if (record == "header") {
      if (j.value("schema", "") != kSchema)
        throw SchemaMismatch("unsupported results schema: " +
                             j.value("schema", std::string("<missing>")));
      saw_header = true;
      continue;
    }
    if (record != "result")
      throw SchemaMismatch("unexpected record type: " + record);
    if (!saw_header) throw SchemaMismatch("result record before header");

    runner::TestResult r;
    r.case_id = j.at("case_id").get<std::string>();
    r.kind = kind_from_name(j.at("kind").get<std::string>());
    r.model = model_from_name(j.at("model").get<std::string>());
    r.mode = static_cast<models::Mode>(j.at("mode").get<int>());
    const auto& obs = j.at("observed");
    r.observed.cls =
        runner::observed_from_name(obs.at("class").get<std::string>());
    if (obs.contains("icmp_type"))
      r.observed.icmp_type = obs.at("icmp_type").get<std::uint8_t>();
    if (obs.contains("icmp_code"))
      r.observed.icmp_code = obs.at("icmp_code").get<std::uint8_t>();
    for (const auto& [name, described] : j.at("oracle").items()) {
      const auto policy = reassembly::policy_from_name(name);
      if (!policy) throw SchemaMismatch("unknown policy in oracle: " + name);
      r.oracle.emplace(*policy, described.get<std::string>());
    }
    results.push_back(std::move(r));
  }
  if (!saw_header) throw SchemaMismatch("results stream has no header");
  return results;
}

std::string csv_matrix(const ComplianceReport& report) {
  std::map<std::pair<int, int>, int> cells;
  for (const auto& c : report.reply_matrix)
    cells[{static_cast<int>(c.model), static_cast<int>(c.mode)}] = c.replied;

  std::ostringstream out;
  out << "target";
  static constexpr struct {
    models::ModelKind model;
    models::Mode mode;
    const char* column;
  } kColumns[] = {
      {models::ModelKind::ShankarPaxson, models::Mode::Single, "shankar-paxson-single"},
      {models::ModelKind::ShankarPaxson, models::Mode::RepeatSameId, "shankar-paxson-repeat"},
      {models::ModelKind::ShankarPaxson, models::Mode::MultiPacketDistinctIds, "shankar-paxson-multi"},
      {models::ModelKind::ThreeFragment, models::Mode::Single, "three-fragment"},
      {models::ModelKind::NewModel, models::Mode::Single, "new-single"},
      {models::ModelKind::NewModel, models::Mode::RepeatSameId, "new-repeat"},
      {models::ModelKind::NewModel, models::Mode::MultiPacketDistinctIds, "new-multi"},
  };
  for (const auto& col : kColumns) out << ',' << col.column;
  out << '\n' << report.target;
  for (const auto& col : kColumns) {
    const auto it =
        cells.find({static_cast<int>(col.model), static_cast<int>(col.mode)});
    out << ',' << (it == cells.end() ? 0 : it->second);
  }
  out << '\n';
  return out.str();
}

std::string human_summary(const ComplianceReport& report) {
  std::ostringstream out;
  out << "target " << report.target << "\n";
  out << "RFC 5722: " << verdict_name(report.rfc5722) << " ("
      << report.overlap_replied << " of " << report.overlap_cases
      << " overlap cases answered)\n";
  for (const auto& [case_id, verdict] : report.rfc9099)
    out << "RFC 9099 " << case_id << ": " << verdict_name(verdict) << "\n";
  for (const auto& cell : report.reply_matrix)
    out << models::model_name(cell.model) << " mode "
        << static_cast<int>(cell.mode) << ": " << cell.replied << "/"
        << cell.total << " replied\n";
  if (!report.fingerprint.empty()) {
    out << "policy fingerprint:";
    for (const auto& pa : report.fingerprint)
      out << " " << reassembly::policy_name(pa.policy) << "=" << pa.matches
          << "/" << pa.total;
    out << "\n";
    out << "best match: "
        << reassembly::policy_name(report.fingerprint.front().policy) << "\n";
  }
  return out.str();
}

}  // namespace frag6::report
