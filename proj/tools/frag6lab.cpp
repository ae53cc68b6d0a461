#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "frag6/models.hpp"
#include "frag6/oracle.hpp"
#include "frag6/pcap.hpp"
#include "frag6/report.hpp"
#include "frag6/runner.hpp"
#include "frag6/scenarios.hpp"

namespace {

using namespace frag6;

models::CampaignSelection selection_from(const std::string& model) {
  models::CampaignSelection s;
  if (model == "sp") {
    s.shankar_paxson = true;
  } else if (model == "3frag") {
    s.three_fragment = true;
  } else if (model == "new") {
    s.new_model = true;
  } else if (model == "rfc9099") {
    s.rfc9099 = true;
  } else if (model == "all") {
    s = models::CampaignSelection::all();
  } else {
    throw Error("unknown model selection: " + model);
  }
  return s;
}

std::set<models::Mode> modes_from(const std::vector<int>& modes) {
  std::set<models::Mode> out;
  for (int m : modes) {
    if (m < 1 || m > 3) throw Error("mode must be 1, 2 or 3");
    out.insert(static_cast<models::Mode>(m));
  }
  if (out.empty()) throw Error("at least one mode is required");
  return out;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error("cannot open output file: " + path);
  return out;
}

void write_frames_pcap(const std::string& path,
                       const std::vector<wire::Frame>& frames) {
  std::vector<pcap::Record> records;
  std::uint64_t t = 0;
  for (const auto& f : frames) {
    records.push_back({t, f});
    t += 10000;
  }
  auto out = open_out(path, true);
  pcap::write_capture(out, records);
}

struct CampaignArgs {
  std::string model{"all"};
  std::vector<int> modes{1, 2, 3};
  std::string target{"2001:db8::2"};
  std::string source{"2001:db8::1"};
  std::string iface;
  std::string dry_run_policy;
  bool emulate_chain_check{false};
  std::string out{"frag6-results.jsonl"};
  std::string csv;
  std::string pcap;
  int delay_ms{10};
  double timeout_s{35.0};
  std::uint64_t seed{1};
};

int run_campaign_cmd(const CampaignArgs& args) {
  const auto cases = models::build_campaign(selection_from(args.model),
                                            modes_from(args.modes), args.seed);
  runner::RunnerConfig cfg;
  cfg.target = args.target;
  cfg.source = args.source;
  cfg.iface = args.iface;
  cfg.inter_frame_delay_ms = args.delay_ms;
  cfg.reply_timeout_s = args.timeout_s;
  cfg.seed = args.seed;
  cfg.pcap_path = args.pcap;
  if (!args.dry_run_policy.empty()) {
    const auto policy = reassembly::policy_from_name(args.dry_run_policy);
    if (!policy) throw Error("unknown policy: " + args.dry_run_policy);
    cfg.dry_run = runner::DryRunConfig{*policy, args.emulate_chain_check};
  }

  std::cerr << cases.size() << " cases against "
            << (cfg.dry_run ? "dry-run policy " + args.dry_run_policy
                            : "target " + cfg.target)
            << "\n";
  const auto results = runner::run_campaign(cases, cfg, &std::cerr);

  {
    auto out = open_out(args.out);
    report::write_results(out, results, cfg.target);
  }
  const auto summary = report::aggregate(results, cfg.target);
  if (!args.csv.empty()) {
    auto out = open_out(args.csv);
    out << report::csv_matrix(summary);
  }
  std::cout << report::human_summary(summary);
  std::cerr << "results written to " << args.out << "\n";
  return 0;
}

struct OracleArgs {
  std::string model{"all"};
  std::vector<int> modes{1, 2, 3};
  std::string out{"frag6-oracle.jsonl"};
  std::uint64_t seed{1};
  bool manifest_only{false};
};

int run_oracle_cmd(const OracleArgs& args) {
  const auto cases = models::build_campaign(selection_from(args.model),
                                            modes_from(args.modes), args.seed);
  auto out = open_out(args.out);
  if (args.manifest_only)
    models::write_manifest(out, cases, args.seed);
  else
    reassembly::write_oracle_table(out, cases, args.seed);
  std::cerr << cases.size() << " cases written to " << args.out << "\n";
  return 0;
}

struct FingerprintArgs {
  std::string in;
  std::string csv;
};

int run_fingerprint_cmd(const FingerprintArgs& args) {
  std::ifstream in(args.in);
  if (!in) throw Error("cannot open results file: " + args.in);
  const auto results = report::read_results(in);
  if (results.empty()) throw Error("results file holds no cases");
  std::string target = "unknown";
  const auto summary = report::aggregate(results, target);
  if (!args.csv.empty()) {
    auto out = open_out(args.csv);
    out << report::csv_matrix(summary);
  }
  std::cout << report::human_summary(summary);
  return 0;
}

struct ScenarioArgs {
  std::string name;
  std::string pcap{"scenario.pcap"};
  std::string src{"2001:db8::1"};
  std::string dst{"2001:db8::2"};
  std::string strategy{"shuffle"};
  std::string replacement;
  std::size_t slot{0};
  std::string injection{"before"};
  std::uint64_t seed{1};
  std::uint32_t identification{0x51510001};
  std::uint32_t span_begin{4};
  std::uint32_t span_end{6};
};

int run_scenario_cmd(const ScenarioArgs& args) {
  const auto src = wire::Ipv6Address::from_string(args.src);
  const auto dst = wire::Ipv6Address::from_string(args.dst);

  std::vector<wire::Frame> frames;
  if (args.name == "rfc9099-exp1" || args.name == "rfc9099-exp2") {
    scenarios::Rfc9099Params params;
    params.src = src;
    params.dst = dst;
    frames = args.name == "rfc9099-exp1"
                 ? scenarios::rfc9099_experiment_one(params).frames
                 : scenarios::rfc9099_experiment_two(params).frames;
  } else if (args.name == "syslog") {
    frames = scenarios::syslog_frames(src, dst);
  } else if (args.name == "syslog-attack") {
    scenarios::ForgeStrategy strategy;
    if (args.strategy == "shuffle") {
      strategy = scenarios::ForgeStrategy::Shuffle;
    } else if (args.strategy == "delta") {
      strategy = scenarios::ForgeStrategy::DeltaCompensation;
    } else {
      throw Error("unknown strategy: " + args.strategy);
    }
    scenarios::ForgeOptions options;
    options.seed = args.seed;
    options.replacement = bytes_of(args.replacement);
    options.slot = args.slot;
    const auto injection = args.injection == "after"
                               ? scenarios::Injection::After
                               : scenarios::Injection::Before;
    frames = scenarios::syslog_attack_frames(src, dst, strategy, options,
                                             injection);
  } else if (args.name == "dos") {
    frames.push_back(scenarios::dos_overlap_fragment(
        args.identification, src, dst, {args.span_begin, args.span_end}));
  } else {
    throw Error("unknown scenario: " + args.name);
  }

  write_frames_pcap(args.pcap, frames);
  std::cerr << frames.size() << " frames written to " << args.pcap << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IPv6 overlapping-fragment test campaigns, reassembly-policy "
               "oracles and compliance reports"};
  app.require_subcommand(1);

  CampaignArgs campaign;
  auto* campaign_cmd = app.add_subcommand(
      "campaign", "Generate the selected campaign and run it");
  campaign_cmd->add_option("--model", campaign.model,
                           "sp, 3frag, new, rfc9099 or all");
  campaign_cmd->add_option("--modes", campaign.modes,
                           "modes to include: 1 single, 2 repeat, 3 multi")
      ->delimiter(',');
  campaign_cmd->add_option("--target", campaign.target, "destination address");
  campaign_cmd->add_option("--source", campaign.source, "source address");
  campaign_cmd->add_option("--iface", campaign.iface,
                           "interface scope for link-local targets");
  campaign_cmd->add_option("--dry-run", campaign.dry_run_policy,
                           "simulate against this reassembly policy instead "
                           "of sending");
  campaign_cmd->add_flag("--emulate-chain-check", campaign.emulate_chain_check,
                         "dry-run answers bare first fragments with "
                         "parameter problem code 3");
  campaign_cmd->add_option("--out", campaign.out, "results file (json lines)");
  campaign_cmd->add_option("--csv", campaign.csv, "reply-count matrix file");
  campaign_cmd->add_option("--pcap", campaign.pcap, "write sent frames here");
  campaign_cmd->add_option("--delay-ms", campaign.delay_ms,
                           "pause between frames (live runs)");
  campaign_cmd->add_option("--timeout-s", campaign.timeout_s,
                           "per-case reply deadline");
  campaign_cmd->add_option("--seed", campaign.seed, "identification seed");

  OracleArgs oracle;
  auto* oracle_cmd = app.add_subcommand(
      "oracle", "Write the campaign manifest with expected outcomes");
  oracle_cmd->add_option("--model", oracle.model, "sp, 3frag, new, rfc9099 or all");
  oracle_cmd->add_option("--modes", oracle.modes, "modes to include")
      ->delimiter(',');
  oracle_cmd->add_option("--out", oracle.out, "manifest file (json lines)");
  oracle_cmd->add_option("--seed", oracle.seed, "identification seed");
  oracle_cmd->add_flag("--manifest-only", oracle.manifest_only,
                       "omit the per-policy outcome table");

  FingerprintArgs fingerprint;
  auto* fingerprint_cmd = app.add_subcommand(
      "fingerprint", "Rank reassembly policies against recorded results");
  fingerprint_cmd->add_option("--in", fingerprint.in, "results file")
      ->required();
  fingerprint_cmd->add_option("--csv", fingerprint.csv,
                              "reply-count matrix file");

  ScenarioArgs scenario;
  auto* scenario_cmd = app.add_subcommand(
      "scenario", "Write single attack or probe scenarios as pcap");
  scenario_cmd
      ->add_option("--name", scenario.name,
                   "rfc9099-exp1, rfc9099-exp2, syslog, syslog-attack or dos")
      ->required();
  scenario_cmd->add_option("--pcap", scenario.pcap, "output capture file");
  scenario_cmd->add_option("--src", scenario.src, "source address");
  scenario_cmd->add_option("--dst", scenario.dst, "destination address");
  scenario_cmd->add_option("--strategy", scenario.strategy,
                           "syslog-attack: shuffle or delta");
  scenario_cmd->add_option("--replacement", scenario.replacement,
                           "delta strategy: substitute fragment text");
  scenario_cmd->add_option("--slot", scenario.slot,
                           "delta strategy: byte offset absorbing the "
                           "checksum difference");
  scenario_cmd->add_option("--injection", scenario.injection,
                           "syslog-attack: before or after the genuine "
                           "fragment");
  scenario_cmd->add_option("--seed", scenario.seed, "shuffle seed");
  scenario_cmd->add_option("--id", scenario.identification,
                           "dos: identification of the attacked flow");
  scenario_cmd->add_option("--span-begin", scenario.span_begin,
                           "dos: first claimed 8-octet unit");
  scenario_cmd->add_option("--span-end", scenario.span_end,
                           "dos: one past the last claimed unit");

  try {
    app.parse(argc, argv);
    if (*campaign_cmd) return run_campaign_cmd(campaign);
    if (*oracle_cmd) return run_oracle_cmd(oracle);
    if (*fingerprint_cmd) return run_fingerprint_cmd(fingerprint);
    if (*scenario_cmd) return run_scenario_cmd(scenario);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
