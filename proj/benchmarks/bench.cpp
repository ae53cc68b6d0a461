#include <benchmark/benchmark.h>

#include <random>
#include <set>

#include "frag6/checksum.hpp"
#include "frag6/models.hpp"
#include "frag6/reassembly.hpp"
#include "frag6/runner.hpp"
#include "frag6/wire.hpp"

using namespace frag6;

namespace {

void BM_InternetChecksum1K(benchmark::State& state) {
  std::mt19937_64 rng(1);
  Bytes data(1024);
  for (auto& b : data) b = static_cast<std::uint8_t>(rng());
  const checksum::PseudoHeader pseudo;
  for (auto _ : state)
    benchmark::DoNotOptimize(checksum::internet_checksum(pseudo, data));
  state.SetBytesProcessed(
      static_cast<std::int64_t>(state.iterations()) * 1024);
}
BENCHMARK(BM_InternetChecksum1K);

void BM_SimulateCanonicalOrder(benchmark::State& state) {
  const auto model = models::new_model();
  const std::vector<std::size_t> order = {0, 1, 2, 3, 4, 5};
  const auto policy = static_cast<reassembly::Policy>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(reassembly::simulate(model.specs, order, policy));
}
BENCHMARK(BM_SimulateCanonicalOrder)
    ->Arg(static_cast<int>(reassembly::Policy::Bsd))
    ->Arg(static_cast<int>(reassembly::Policy::FragFirstWins))
    ->Arg(static_cast<int>(reassembly::Policy::Rfc5722Strict));

void BM_FullPermutationTally(benchmark::State& state) {
  const auto model = models::new_model();
  const auto orders = models::permutations(model);
  for (auto _ : state) {
    std::size_t complete = 0;
    for (const auto& order : orders) {
      const auto outcome = reassembly::simulate(
          model.specs, order, reassembly::Policy::FragFirstWins);
      complete +=
          std::holds_alternative<reassembly::Complete>(outcome) ? 1 : 0;
    }
    benchmark::DoNotOptimize(complete);
  }
  state.SetItemsProcessed(
      static_cast<std::int64_t>(state.iterations()) *
      static_cast<std::int64_t>(orders.size()));
}
BENCHMARK(BM_FullPermutationTally);

void BM_BuildCampaign(benchmark::State& state) {
  const std::set<models::Mode> modes = {models::Mode::Single,
                                        models::Mode::RepeatSameId,
                                        models::Mode::MultiPacketDistinctIds};
  models::CampaignSelection sel;
  sel.new_model = true;
  for (auto _ : state)
    benchmark::DoNotOptimize(models::build_campaign(sel, modes, 7));
}
BENCHMARK(BM_BuildCampaign);

void BM_MaterializeAndDryRun(benchmark::State& state) {
  models::TestCase c;
  c.case_id = "bench";
  c.model = models::new_model();
  c.arrival_order = {0, 1, 2, 3, 4, 5};
  c.identifications = {0x1111};
  runner::RunnerConfig cfg;
  cfg.dry_run =
      runner::DryRunConfig{reassembly::Policy::FragFirstWins, false};
  cfg.inter_frame_delay_ms = 0;
  for (auto _ : state) benchmark::DoNotOptimize(runner::run_case(c, cfg));
}
BENCHMARK(BM_MaterializeAndDryRun);

void BM_ParseFragmentFrame(benchmark::State& state) {
  models::TestCase c;
  c.model = models::new_model();
  c.arrival_order = {0, 1, 2, 3, 4, 5};
  c.identifications = {0x1111};
  const runner::RunnerConfig cfg;
  const auto frames = runner::materialize_case(c, cfg);
  for (auto _ : state)
    benchmark::DoNotOptimize(wire::parse_frame(frames[0]));
}
BENCHMARK(BM_ParseFragmentFrame);

}  // namespace

BENCHMARK_MAIN();
