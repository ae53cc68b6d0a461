#include "frag6/models.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <unordered_set>

#include "manifest_detail.hpp"

namespace frag6::models {

std::string_view model_name(ModelKind m) {
  switch (m) {
    case ModelKind::ShankarPaxson: return "shankar-paxson";
    case ModelKind::ThreeFragment: return "three-fragment";
    case ModelKind::NewModel: return "new";
  }
  return "?";
}

namespace {

wire::FragmentSpec spec(char label, std::uint16_t offset, std::uint16_t len,
                        bool m, bool header) {
  wire::FragmentSpec s;
  s.label = label;
  s.offset_units = offset;
  s.length_units = len;
  s.m_flag = m;
  s.carries_upper_header = header;
  s.pattern = label;
  return s;
}

}  // namespace

OverlapModel shankar_paxson_model() {
  OverlapModel m;
  m.name = ModelKind::ShankarPaxson;
  m.specs = {
      spec('A', 0, 4, true, true),
      spec('B', 5, 2, true, false),
      spec('C', 7, 3, true, false),
      spec('D', 4, 4, true, false),
      spec('E', 7, 3, true, false),
      spec('F', 10, 3, false, false),
  };
  m.expected_extent_units = 13;
  return m;
}

OverlapModel new_model() {
  OverlapModel m;
  m.name = ModelKind::NewModel;
  m.specs = {
      spec('A', 0, 4, true, true),
      spec('B', 4, 2, true, false),
      spec('C', 6, 3, true, false),
      spec('D', 3, 4, true, false),
      spec('E', 6, 3, true, false),
      spec('F', 9, 3, false, false),
  };
  m.expected_extent_units = 12;
  return m;
}

std::vector<TestCase> three_fragment_model_suite() {
  // Middle-fragment placements, offsets 0-4 units, lengths 1-3 units:
  // inside the first fragment (incl. its header unit and its exact span),
  // straddling the boundary, abutting the first fragment exactly, inside
  // the final fragment, matching its span, and running past its end.
  static constexpr struct { std::uint16_t offset, len; } kCombos[] = {
      {0, 1}, {0, 3}, {1, 1}, {1, 2}, {2, 1}, {2, 2},
      {3, 1}, {3, 2}, {3, 3}, {4, 2}, {4, 3},
  };

  std::vector<TestCase> cases;
  int combo_no = 0;
  for (const auto& combo : kCombos) {
    ++combo_no;
    for (bool middle_m : {true, false}) {
      for (bool forward : {true, false}) {
        TestCase c;
        c.kind = CaseKind::Model;
        c.model.name = ModelKind::ThreeFragment;
        c.model.specs = {
            spec('A', 0, 3, true, true),
            spec('B', combo.offset, combo.len, middle_m, false),
            spec('C', 3, 3, false, false),
        };
        c.model.expected_extent_units = 6;
        c.arrival_order = forward ? std::vector<std::size_t>{0, 1, 2}
                                  : std::vector<std::size_t>{2, 1, 0};
        c.mode = Mode::Single;
        c.repetitions = 1;
        char id[64];
        std::snprintf(id, sizeof(id), "3frag-c%02d-m%d-%s", combo_no,
                      middle_m ? 1 : 0, forward ? "fwd" : "rev");
        c.case_id = id;
        cases.push_back(std::move(c));
      }
    }
  }
  return cases;
}

std::vector<std::vector<std::size_t>> permutations(const OverlapModel& model) {
  const std::size_t n = model.specs.size();
  if (n > 8) throw Error("permutations: more than 8 fragments");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<std::size_t>> all;
  do {
    all.push_back(order);
  } while (std::next_permutation(order.begin(), order.end()));
  return all;
}

CampaignSelection CampaignSelection::all() {
  return CampaignSelection{true, true, true, true};
}

namespace {

void assign_identifications(std::vector<TestCase>& cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::unordered_set<std::uint32_t> used;
  auto draw = [&] {
    for (;;) {
      auto id = static_cast<std::uint32_t>(rng());
      if (id != 0 && used.insert(id).second) return id;
    }
  };
  for (auto& c : cases) {
    const std::size_t want = c.mode == Mode::MultiPacketDistinctIds
                                 ? static_cast<std::size_t>(c.repetitions)
                                 : 1;
    c.identifications.clear();
    for (std::size_t i = 0; i < want; ++i) c.identifications.push_back(draw());
  }
}

std::vector<TestCase> permutation_cases(const OverlapModel& model,
                                        std::string_view tag,
                                        const std::set<Mode>& modes) {
  std::vector<TestCase> cases;
  const auto orders = permutations(model);
  for (Mode mode : modes) {
    for (std::size_t i = 0; i < orders.size(); ++i) {
      TestCase c;
      c.kind = CaseKind::Model;
      c.model = model;
      c.arrival_order = orders[i];
      c.mode = mode;
      c.repetitions = mode == Mode::Single ? 1 : 5;
      char id[64];
      std::snprintf(id, sizeof(id), "%.*s-m%d-p%04zu",
                    static_cast<int>(tag.size()), tag.data(),
                    static_cast<int>(mode), i);
      c.case_id = id;
      cases.push_back(std::move(c));
    }
  }
  return cases;
}

TestCase rfc9099_case(CaseKind kind) {
  TestCase c;
  c.kind = kind;
  c.mode = Mode::Single;
  c.repetitions = 1;
  c.model.name = ModelKind::NewModel;  // unused; geometry below is canonical
  if (kind == CaseKind::Rfc9099Exp1) {
    c.case_id = "rfc9099-exp1";
    c.model.specs = {
        spec('A', 0, 1, true, true),   // echo header alone
        spec('B', 1, 1, true, false),  // plain payload
        spec('C', 2, 2, false, false), // destination options + payload
    };
    c.model.expected_extent_units = 4;
  } else {
    c.case_id = "rfc9099-exp2";
    c.model.specs = {
        spec('A', 0, 0, true, false),  // bare fragment, empty body
        spec('B', 0, 1, true, true),   // echo header
        spec('C', 1, 1, false, false),
    };
    c.model.expected_extent_units = 2;
  }
  for (auto& s : c.model.specs) s.pattern.reset();  // bodies are scenario-defined
  c.arrival_order = {0, 1, 2};
  return c;
}

}  // namespace

std::vector<TestCase> build_campaign(const CampaignSelection& selection,
                                     const std::set<Mode>& modes,
                                     std::uint64_t seed) {
  std::vector<TestCase> cases;
  if (selection.shankar_paxson) {
    auto block = permutation_cases(shankar_paxson_model(), "sp", modes);
    cases.insert(cases.end(), block.begin(), block.end());
  }
  if (selection.three_fragment) {
    auto block = three_fragment_model_suite();
    cases.insert(cases.end(), block.begin(), block.end());
  }
  if (selection.new_model) {
    auto block = permutation_cases(new_model(), "new", modes);
    cases.insert(cases.end(), block.begin(), block.end());
  }
  if (selection.rfc9099) {
    cases.push_back(rfc9099_case(CaseKind::Rfc9099Exp1));
    cases.push_back(rfc9099_case(CaseKind::Rfc9099Exp2));
  }
  assign_identifications(cases, seed);
  return cases;
}

bool ConstraintReport::all_satisfied() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ConstraintCheck& c) { return c.satisfied; });
}

namespace {

struct Range {
  std::uint32_t b, e;
};

Range range_of(const wire::FragmentSpec& s) {
  return {s.offset_units,
          static_cast<std::uint32_t>(s.offset_units + s.length_units)};
}

bool ranges_overlap(Range x, Range y) { return x.b < y.e && y.b < x.e; }

}  // namespace

ConstraintReport validate_model_constraints(const OverlapModel& model) {
  ConstraintReport report;
  const auto& specs = model.specs;

  auto add = [&](std::string name, bool ok, std::string detail) {
    report.checks.push_back(ConstraintCheck{std::move(name), ok, std::move(detail)});
  };

  int finals = 0, headers = 0;
  bool lengths_ok = true;
  for (const auto& s : specs) {
    if (!s.m_flag) ++finals;
    if (s.offset_units == 0 && s.carries_upper_header) ++headers;
    if (s.length_units < 1) lengths_ok = false;
  }
  add("one-final-fragment", finals == 1,
      "fragments with M=0: " + std::to_string(finals));
  add("one-header-fragment", headers == 1,
      "offset-0 header fragments: " + std::to_string(headers));
  add("positive-lengths", lengths_ok, lengths_ok ? "" : "zero-length fragment");

  bool twin = false, later_greater_partial = false, later_smaller = false;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (std::size_t j = i + 1; j < specs.size(); ++j) {
      const auto ri = range_of(specs[i]), rj = range_of(specs[j]);
      if (specs[i].offset_units == specs[j].offset_units &&
          specs[i].length_units == specs[j].length_units)
        twin = true;
      if (!ranges_overlap(ri, rj)) continue;
      const bool covers_whole = rj.b <= ri.b && ri.e <= rj.e;
      if (specs[j].offset_units > specs[i].offset_units && !covers_whole)
        later_greater_partial = true;
      if (specs[j].offset_units < specs[i].offset_units) later_smaller = true;
    }
  }
  add("identical-span-twin", twin, "");
  add("later-greater-offset-partial-overlap", later_greater_partial, "");
  add("later-smaller-offset-overlap", later_smaller, "");

  if (model.name == ModelKind::NewModel) {
    std::set<std::string> hole_free;
    for (const auto& order : permutations(model)) {
      for (auto policy : {reassembly::Policy::FragFirstWins,
                          reassembly::Policy::FragLastWins}) {
        auto outcome = reassembly::simulate(specs, order, policy);
        if (auto* c = std::get_if<reassembly::Complete>(&outcome))
          hole_free.insert(c->letter_string);
      }
    }
    const std::set<std::string> expected{"AAABBCCCFFF", "AAABBEEEFFF"};
    std::string seen;
    for (const auto& s : hole_free) seen += s + " ";
    add("hole-free-outcomes", hole_free == expected, "saw: " + seen);
  }
  return report;
}

Bytes canonical_upper_payload(const OverlapModel& model, checksum::Parity parity) {
  std::uint32_t extent = model.expected_extent_units;
  for (const auto& s : model.specs)
    extent = std::max(extent,
                      static_cast<std::uint32_t>(s.offset_units + s.length_units));

  Bytes out(static_cast<std::size_t>(extent) * wire::kUnitBytes, 0);
  std::vector<bool> filled(extent, false);
  for (const auto& s : model.specs) {  // canonical order; first cover wins
    for (std::uint32_t u = s.offset_units; u < s.offset_units + s.length_units;
         ++u) {
      if (u >= extent || filled[u]) continue;
      filled[u] = true;
      if (s.carries_upper_header && u == s.offset_units) continue;  // header slot
      if (!s.pattern) continue;
      const auto pat = checksum::pattern_bytes(*s.pattern, parity);
      for (std::size_t k = 0; k < wire::kUnitBytes; ++k)
        out[u * wire::kUnitBytes + k] = pat[k % 4];
    }
  }
  return out;
}

std::string canonical_letters(const OverlapModel& model) {
  std::uint32_t extent = model.expected_extent_units;
  std::string letters(extent, '?');
  std::vector<bool> filled(extent, false);
  bool header = false;
  for (const auto& s : model.specs) {
    header |= s.carries_upper_header;
    for (std::uint32_t u = s.offset_units;
         u < s.offset_units + s.length_units && u < extent; ++u) {
      if (filled[u]) continue;
      filled[u] = true;
      letters[u] = s.label;
    }
  }
  return header ? letters.substr(1) : letters;
}

namespace detail {

nlohmann::ordered_json case_record(const TestCase& c) {
  nlohmann::ordered_json j;
  j["record"] = "case";
  j["case_id"] = c.case_id;
  switch (c.kind) {
    case CaseKind::Model: j["model"] = std::string(model_name(c.model.name)); break;
    case CaseKind::Rfc9099Exp1: j["model"] = "rfc9099-exp1"; break;
    case CaseKind::Rfc9099Exp2: j["model"] = "rfc9099-exp2"; break;
  }
  j["mode"] = static_cast<int>(c.mode);
  j["repetitions"] = c.repetitions;
  j["arrival_order"] = c.arrival_order;
  j["identifications"] = c.identifications;
  nlohmann::ordered_json geom = nlohmann::ordered_json::array();
  for (const auto& s : c.model.specs) {
    nlohmann::ordered_json g;
    g["label"] = std::string(1, s.label);
    g["offset_units"] = s.offset_units;
    g["length_units"] = s.length_units;
    g["m"] = s.m_flag;
    g["carries_upper_header"] = s.carries_upper_header;
    if (s.pattern) g["pattern"] = std::string(1, *s.pattern);
    geom.push_back(std::move(g));
  }
  j["geometry"] = std::move(geom);
  return j;
}

}  // namespace detail

std::string manifest_header_line(std::size_t case_count, std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["record"] = "header";
  j["schema"] = "frag6lab/campaign/1";
  j["cases"] = case_count;
  j["reference_total"] = kReferenceDatasetTotal;
  j["seed"] = seed;
  return j.dump();
}

std::string manifest_case_line(const TestCase& c) {
  return detail::case_record(c).dump();
}

void write_manifest(std::ostream& out, const std::vector<TestCase>& cases,
                    std::uint64_t seed) {
  out << manifest_header_line(cases.size(), seed) << '\n';
  for (const auto& c : cases) out << manifest_case_line(c) << '\n';
}

}  // namespace models
