#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "frag6/models.hpp"
#include "frag6/reassembly.hpp"
#include "frag6/report.hpp"
#include "frag6/runner.hpp"
#include <json.hpp>

using namespace frag6;
using runner::ObservedClass;
using report::Rfc5722Verdict;
using report::Rfc9099Verdict;

namespace {

runner::Observed observed(ObservedClass cls) {
  runner::Observed o;
  o.cls = cls;
  if (cls == ObservedClass::EchoReply) {
    o.icmp_type = 129;
    o.icmp_code = 0;
  } else if (cls == ObservedClass::ParamProblem) {
    o.icmp_type = 4;
    o.icmp_code = 3;
  }
  return o;
}

runner::TestResult model_result(const std::string& id, models::ModelKind model,
                                models::Mode mode, ObservedClass cls,
                                const std::string& strict_outcome) {
  runner::TestResult r;
  r.case_id = id;
  r.kind = models::CaseKind::Model;
  r.model = model;
  r.mode = mode;
  r.observed = observed(cls);
  r.oracle = {
      {reassembly::Policy::First, "complete:AB"},
      {reassembly::Policy::Last, "complete:AB"},
      {reassembly::Policy::Bsd, "complete:AB"},
      {reassembly::Policy::BsdRight, "complete:AB"},
      {reassembly::Policy::Linux, "complete:AB"},
      {reassembly::Policy::FragFirstWins, "incomplete:[1,2)"},
      {reassembly::Policy::FragLastWins, "incomplete:[0,1)"},
      {reassembly::Policy::Rfc5722Strict, strict_outcome},
  };
  return r;
}

runner::TestResult probe_result(const std::string& id, models::CaseKind kind,
                                ObservedClass cls) {
  runner::TestResult r;
  r.case_id = id;
  r.kind = kind;
  r.observed = observed(cls);
  return r;
}

}  // namespace

TEST_CASE("verdict names are stable") {
  CHECK(report::verdict_name(Rfc5722Verdict::Compliant) == "compliant");
  CHECK(report::verdict_name(Rfc5722Verdict::NonCompliant) == "non-compliant");
  CHECK(report::verdict_name(Rfc9099Verdict::CompliantSilent) ==
        "compliant-silent");
  CHECK(report::verdict_name(Rfc9099Verdict::CompliantDiagnostic) ==
        "compliant-diagnostic");
  CHECK(report::verdict_name(Rfc9099Verdict::NonCompliantReplied) ==
        "non-compliant-replied");
}

TEST_CASE("chain probe verdicts follow the observed reply class") {
  CHECK(report::classify_rfc9099(observed(ObservedClass::EchoReply)) ==
        Rfc9099Verdict::NonCompliantReplied);
  CHECK(report::classify_rfc9099(observed(ObservedClass::ParamProblem)) ==
        Rfc9099Verdict::CompliantDiagnostic);
  CHECK(report::classify_rfc9099(observed(ObservedClass::Silence)) ==
        Rfc9099Verdict::CompliantSilent);
  CHECK(report::classify_rfc9099(observed(ObservedClass::OtherIcmp)) ==
        Rfc9099Verdict::CompliantSilent);
}

TEST_CASE("outcome class recovers from described strings") {
  CHECK(report::outcome_class_from_describe("complete:AAABBCCCFFF") ==
        reassembly::OutcomeClass::Complete);
  CHECK(report::outcome_class_from_describe("incomplete:[4,5)") ==
        reassembly::OutcomeClass::Incomplete);
  CHECK(report::outcome_class_from_describe("dropped:overlap") ==
        reassembly::OutcomeClass::Dropped);
  CHECK(report::outcome_class_from_describe("dropped:timeout") ==
        reassembly::OutcomeClass::Dropped);
  CHECK_THROWS_AS(report::outcome_class_from_describe("finished:AB"),
                  report::SchemaMismatch);
  CHECK_THROWS_AS(report::outcome_class_from_describe(""),
                  report::SchemaMismatch);
}

TEST_CASE("aggregate counts overlap replies and builds the matrix") {
  std::vector<runner::TestResult> results;
  results.push_back(model_result("sp-0001", models::ModelKind::ShankarPaxson,
                                 models::Mode::Single, ObservedClass::EchoReply,
                                 "dropped:overlap"));
  results.push_back(model_result("new-0001", models::ModelKind::NewModel,
                                 models::Mode::Single, ObservedClass::Silence,
                                 "dropped:overlap"));
  results.push_back(model_result("3frag-c01", models::ModelKind::ThreeFragment,
                                 models::Mode::Single, ObservedClass::EchoReply,
                                 "complete:AB"));
  results.push_back(probe_result("rfc9099-exp1", models::CaseKind::Rfc9099Exp1,
                                 ObservedClass::EchoReply));
  results.push_back(probe_result("rfc9099-exp2", models::CaseKind::Rfc9099Exp2,
                                 ObservedClass::ParamProblem));

  const auto rep = report::aggregate(results, "2001:db8::2");
  CHECK(rep.target == "2001:db8::2");

  // Only the two strict-overlap cases count; one of them was answered.
  CHECK(rep.overlap_cases == 2);
  CHECK(rep.overlap_replied == 1);
  CHECK(rep.rfc5722 == Rfc5722Verdict::NonCompliant);

  REQUIRE(rep.reply_matrix.size() == 3);
  CHECK(rep.reply_matrix[0].model == models::ModelKind::ShankarPaxson);
  CHECK(rep.reply_matrix[0].mode == models::Mode::Single);
  CHECK(rep.reply_matrix[0].replied == 1);
  CHECK(rep.reply_matrix[0].total == 1);
  CHECK(rep.reply_matrix[1].model == models::ModelKind::ThreeFragment);
  CHECK(rep.reply_matrix[2].model == models::ModelKind::NewModel);
  CHECK(rep.reply_matrix[2].replied == 0);

  REQUIRE(rep.rfc9099.size() == 2);
  CHECK(rep.rfc9099.at("rfc9099-exp1") == Rfc9099Verdict::NonCompliantReplied);
  CHECK(rep.rfc9099.at("rfc9099-exp2") == Rfc9099Verdict::CompliantDiagnostic);

  // Three model observations feed the fingerprint ranking.
  REQUIRE(!rep.fingerprint.empty());
  for (const auto& pa : rep.fingerprint) CHECK(pa.total == 3);
}

TEST_CASE("aggregate stays compliant when overlaps go unanswered") {
  std::vector<runner::TestResult> results;
  results.push_back(model_result("new-0001", models::ModelKind::NewModel,
                                 models::Mode::Single, ObservedClass::Silence,
                                 "dropped:overlap"));
  results.push_back(model_result("new-0002", models::ModelKind::NewModel,
                                 models::Mode::Single, ObservedClass::OtherIcmp,
                                 "dropped:overlap"));
  const auto rep = report::aggregate(results, "t");
  CHECK(rep.overlap_cases == 2);
  CHECK(rep.overlap_replied == 0);
  CHECK(rep.rfc5722 == Rfc5722Verdict::Compliant);
}

TEST_CASE("aggregate without model cases has no fingerprint") {
  std::vector<runner::TestResult> results;
  results.push_back(probe_result("rfc9099-exp1", models::CaseKind::Rfc9099Exp1,
                                 ObservedClass::Silence));
  const auto rep = report::aggregate(results, "t");
  CHECK(rep.reply_matrix.empty());
  CHECK(rep.fingerprint.empty());
  CHECK(rep.overlap_cases == 0);
  CHECK(rep.rfc5722 == Rfc5722Verdict::Compliant);
  CHECK(rep.rfc9099.at("rfc9099-exp1") == Rfc9099Verdict::CompliantSilent);
}

TEST_CASE("results stream round-trips exactly") {
  std::vector<runner::TestResult> results;
  results.push_back(model_result("sp-m1-p0000", models::ModelKind::ShankarPaxson,
                                 models::Mode::RepeatSameId,
                                 ObservedClass::EchoReply, "dropped:overlap"));
  results.push_back(model_result("new-m0-p0719", models::ModelKind::NewModel,
                                 models::Mode::MultiPacketDistinctIds,
                                 ObservedClass::Silence, "dropped:overlap"));
  results.push_back(probe_result("rfc9099-exp2", models::CaseKind::Rfc9099Exp2,
                                 ObservedClass::ParamProblem));
  // One observation with a type but no code.
  results[1].observed.cls = ObservedClass::OtherIcmp;
  results[1].observed.icmp_type = 1;
  results[1].observed.icmp_code = std::nullopt;

  std::stringstream stream;
  report::write_results(stream, results, "fe80::1%eth0");

  std::string first_line;
  std::getline(stream, first_line);
  const auto header = nlohmann::json::parse(first_line);
  CHECK(header.at("record") == "header");
  CHECK(header.at("schema") == "frag6lab/results/1");
  CHECK(header.at("target") == "fe80::1%eth0");
  CHECK(header.at("cases") == 3);

  stream.clear();
  stream.seekg(0);
  const auto back = report::read_results(stream);
  REQUIRE(back.size() == results.size());
  for (std::size_t i = 0; i < results.size(); ++i) CHECK(back[i] == results[i]);
}

TEST_CASE("results reader rejects malformed streams") {
  SUBCASE("wrong schema") {
    std::istringstream in(
        R"({"record":"header","schema":"frag6lab/results/99","target":"t","cases":0})"
        "\n");
    CHECK_THROWS_AS(report::read_results(in), report::SchemaMismatch);
  }
  SUBCASE("result before header") {
    std::istringstream in(
        R"({"record":"result","case_id":"x","kind":"model","model":"new","mode":1,"observed":{"class":"silence"},"oracle":{}})"
        "\n");
    CHECK_THROWS_AS(report::read_results(in), report::SchemaMismatch);
  }
  SUBCASE("empty stream") {
    std::istringstream in("");
    CHECK_THROWS_AS(report::read_results(in), report::SchemaMismatch);
  }
  SUBCASE("unknown record type") {
    std::istringstream in(
        R"({"record":"header","schema":"frag6lab/results/1","target":"t","cases":0})"
        "\n"
        R"({"record":"banana"})"
        "\n");
    CHECK_THROWS_AS(report::read_results(in), report::SchemaMismatch);
  }
  SUBCASE("unparseable line") {
    std::istringstream in("not json at all\n");
    CHECK_THROWS_AS(report::read_results(in), report::SchemaMismatch);
  }
  SUBCASE("unknown policy name inside the oracle") {
    std::ostringstream text;
    text << R"({"record":"header","schema":"frag6lab/results/1","target":"t","cases":1})"
         << "\n"
         << R"({"record":"result","case_id":"x","kind":"model","model":"new","mode":1,"observed":{"class":"silence"},"oracle":{"mystery":"complete:A"}})"
         << "\n";
    std::istringstream in(text.str());
    CHECK_THROWS_AS(report::read_results(in), report::SchemaMismatch);
  }
}

TEST_CASE("round-trip preserves what a real dry run produced") {
  auto cases = models::three_fragment_model_suite();
  cases.resize(4);
  runner::RunnerConfig cfg;
  cfg.dry_run = runner::DryRunConfig{reassembly::Policy::FragFirstWins, false};
  cfg.inter_frame_delay_ms = 0;
  const auto results = runner::run_campaign(cases, cfg);
  REQUIRE(results.size() == 4);

  std::stringstream stream;
  report::write_results(stream, results, "2001:db8::2");
  const auto back = report::read_results(stream);
  REQUIRE(back.size() == results.size());
  for (std::size_t i = 0; i < results.size(); ++i) CHECK(back[i] == results[i]);
}

TEST_CASE("csv matrix pins its seven columns") {
  std::vector<runner::TestResult> results;
  results.push_back(model_result("a", models::ModelKind::ShankarPaxson,
                                 models::Mode::Single, ObservedClass::EchoReply,
                                 "dropped:overlap"));
  results.push_back(model_result("b", models::ModelKind::ShankarPaxson,
                                 models::Mode::Single, ObservedClass::EchoReply,
                                 "dropped:overlap"));
  results.push_back(model_result("c", models::ModelKind::NewModel,
                                 models::Mode::MultiPacketDistinctIds,
                                 ObservedClass::EchoReply, "dropped:overlap"));
  results.push_back(model_result("d", models::ModelKind::ThreeFragment,
                                 models::Mode::Single, ObservedClass::Silence,
                                 "complete:AB"));
  const auto rep = report::aggregate(results, "host");

  CHECK(report::csv_matrix(rep) ==
        "target,shankar-paxson-single,shankar-paxson-repeat,"
        "shankar-paxson-multi,three-fragment,new-single,new-repeat,new-multi\n"
        "host,2,0,0,0,0,0,1\n");
}

TEST_CASE("human summary names the verdicts and the best policy match") {
  std::vector<runner::TestResult> results;
  results.push_back(model_result("sp-0001", models::ModelKind::ShankarPaxson,
                                 models::Mode::Single, ObservedClass::EchoReply,
                                 "dropped:overlap"));
  results.push_back(probe_result("rfc9099-exp1", models::CaseKind::Rfc9099Exp1,
                                 ObservedClass::ParamProblem));
  const auto rep = report::aggregate(results, "2001:db8::77");
  const auto text = report::human_summary(rep);

  CHECK(text.find("target 2001:db8::77") != std::string::npos);
  CHECK(text.find("RFC 5722: non-compliant (1 of 1 overlap cases answered)") !=
        std::string::npos);
  CHECK(text.find("RFC 9099 rfc9099-exp1: compliant-diagnostic") !=
        std::string::npos);
  CHECK(text.find("policy fingerprint:") != std::string::npos);
  CHECK(text.find("best match: ") != std::string::npos);
}
