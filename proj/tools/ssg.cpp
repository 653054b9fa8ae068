#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ssg/catalog.hpp"
#include "ssg/commensurability.hpp"
#include "ssg/element.hpp"
#include "ssg/errors.hpp"
#include "ssg/quotient.hpp"

using json = nlohmann::ordered_json;
using namespace ssg;

namespace {

constexpr int kSchemaVersion = 1;

enum Exit : int { kPass = 0, kFail = 1, kInconclusive = 2, kUsage = 3 };

struct RunConfig {
  std::string command;
  std::string action;  // catalog action or lemma name
  std::string group;
  std::string group_file;
  std::optional<int> p;
  std::vector<int> vector;
  std::vector<int> levels;
  std::optional<int> m;
  std::optional<int> n;
  int k = 1;
  int count = 5;
  std::optional<std::size_t> budget;
  std::uint64_t seed = 1;
  std::vector<long long> xs;
  std::string out;
  std::string format = "json";

  json to_json() const {
    auto opt = [](const auto& o) { return o ? json(*o) : json(nullptr); };
    return {{"command", command}, {"action", action},         {"group", group},
            {"group_file", group_file}, {"p", opt(p)},        {"vector", vector},
            {"levels", levels},   {"m", opt(m)},              {"n", opt(n)},
            {"k", k},             {"count", count},           {"budget", opt(budget)},
            {"seed", seed},       {"xs", xs},                 {"out", out},
            {"format", format}};
  }

  static RunConfig from_json(const json& j) {
    RunConfig c;
    auto get_opt = [&](const char* key, auto& dst) {
      if (j.contains(key) && !j.at(key).is_null()) {
        dst = j.at(key).get<typename std::remove_reference_t<decltype(dst)>::value_type>();
      }
    };
    c.command = j.at("command").get<std::string>();
    c.action = j.value("action", "");
    c.group = j.value("group", "");
    c.group_file = j.value("group_file", "");
    get_opt("p", c.p);
    c.vector = j.value("vector", std::vector<int>{});
    c.levels = j.value("levels", std::vector<int>{});
    get_opt("m", c.m);
    get_opt("n", c.n);
    c.k = j.value("k", 1);
    c.count = j.value("count", 5);
    get_opt("budget", c.budget);
    c.seed = j.value("seed", std::uint64_t{1});
    c.xs = j.value("xs", std::vector<long long>{});
    c.out = j.value("out", "");
    c.format = j.value("format", "json");
    return c;
  }
};

struct Report {
  std::string verdict = "pass";
  int exit = kPass;
  json result = json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

// Independent re-verification results collected during replay.
struct Rechecks {
  bool ok = true;
  std::vector<std::string> notes;
  void add(bool pass, const std::string& what) {
    if (!pass) ok = false;
    notes.push_back(std::string(pass ? "ok: " : "FAILED: ") + what);
  }
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void set_verdict(Report& r, int exit) {
  r.exit = exit;
  r.verdict = exit == kPass ? "pass" : exit == kFail ? "fail" : "inconclusive";
}

std::string big(const BigInt& n) { return to_string(n); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SelfSimilarGroup load_group(const RunConfig& c) {
  if (!c.group_file.empty()) return custom_group(parse_system(read_file(c.group_file)), c.group_file);
  if (c.group.empty()) throw UsageError("a group is required (--group or --group-file)");
  CatalogParams params;
  params.p = c.p;
  params.vector = c.vector;
  return builtin(c.group, params);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string render(const RunConfig& c, const Report& r) {
  if (c.format == "csv") {
    std::string out = "# schema_version: " + std::to_string(kSchemaVersion) + "\n";
    out += "# run_config: " + c.to_json().dump() + "\n";
    out += "# verdict: " + r.verdict + "\n";
    auto line = [&](const std::vector<std::string>& fields) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ",";
        out += csv_field(fields[i]);
      }
      out += "\n";
    };
    line(r.columns);
    for (const auto& row : r.rows) line(row);
    return out;
  }
  json doc = {{"schema_version", kSchemaVersion},
              {"run_config", c.to_json()},
              {"verdict", r.verdict},
              {"result", r.result}};
  return doc.dump(2) + "\n";
}

std::vector<std::string> cycles(const std::vector<Permutation>& ps) {
  std::vector<std::string> out;
  for (const auto& p : ps) out.push_back(p.cycle_string());
  return out;
}

// catalog

Report run_catalog(const RunConfig& c) {
  Report r;
  if (c.action == "list") {
    r.columns = {"name", "parameters", "summary"};
    json groups = json::array();
    for (const auto& e : catalog_entries()) {
      groups.push_back({{"name", e.name}, {"parameters", e.parameters}, {"summary", e.summary}});
      r.rows.push_back({e.name, e.parameters, e.summary});
    }
    r.result["groups"] = groups;
    return r;
  }
  if (c.action != "show") throw UsageError("catalog action must be list or show");
  auto g = load_group(c);
  json branch_words = json::array();
  for (const Word& w : g.branch.words) branch_words.push_back(g.system->format_word(w));
  auto sylow = validate_sylow(g);
  const char* verdicts[] = {"pass", "fail", "inconclusive"};
  r.result = {{"name", g.name},
              {"degree", g.degree()},
              {"generators", g.generator_names()},
              {"params", g.params},
              {"system", json::parse(serialize_system(*g.system))},
              {"branch", {{"kind", to_string(g.branch.kind)}, {"words", branch_words}}},
              {"sylow", {{"verdict", verdicts[static_cast<int>(sylow.verdict)]},
                         {"generator", sylow.generator},
                         {"closure_size", sylow.closure_size}}}};
  r.columns = {"generator", "perm", "sections"};
  for (const auto& spec : g.system->generators()) {
    std::string perm, secs;
    for (int x = 0; x < g.degree(); ++x) {
      if (x) perm += " ";
      perm += std::to_string(spec.perm[x] + 1);
    }
    for (std::size_t x = 0; x < spec.sections.size(); ++x) {
      if (x) secs += " | ";
      secs += spec.sections[x].empty() ? "e" : g.system->format_word(spec.sections[x]);
    }
    r.rows.push_back({spec.name, perm, secs});
  }
  return r;
}

// quotient

Report run_quotient(const RunConfig& c) {
  if (c.levels.empty()) throw UsageError("quotient needs --level or --levels");
  auto g = load_group(c);
  Report r;
  r.columns = {"level", "chain_order", "closure_order", "agree"};
  json rows = json::array();
  bool ok = true;
  for (const auto& row : order_table(g, c.levels)) {
    ok = ok && row.agree;
    const std::string bfs = row.closure_order ? std::to_string(*row.closure_order) : "";
    rows.push_back({{"level", row.level},
                    {"chain_order", big(row.chain_order)},
                    {"closure_order", row.closure_order ? json(bfs) : json(nullptr)},
                    {"agree", row.agree}});
    r.rows.push_back({std::to_string(row.level), big(row.chain_order), bfs,
                      row.agree ? "true" : "false"});
  }
  r.result = {{"group", g.name}, {"orders", rows}};
  set_verdict(r, ok ? kPass : kFail);
  return r;
}

// verify

int discovered_m(const SelfSimilarGroup& g) {
  auto d = discover_stab_level(g);
  if (!d.m) throw UsageError("no stab-in-K level found; pass --m");
  return *d.m;
}

json certificate_json(const StabCertificate& cert) {
  return {{"lemma", cert.lemma},
          {"m", cert.m},
          {"n", cert.n},
          {"level", cert.level},
          {"verdict", to_string(cert.verdict)},
          {"lhs_order", big(cert.lhs_order)},
          {"rhs_order", big(cert.rhs_order)},
          {"lhs_generators", cycles(cert.lhs_generators)},
          {"rhs_generators", cycles(cert.rhs_generators)},
          {"witness", cert.witness ? json(cert.witness->cycle_string()) : json(nullptr)},
          {"witness_note", cert.witness_note}};
}

Report run_verify(const RunConfig& c, Rechecks* rc) {
  auto g = load_group(c);
  Report r;
  if (c.action == "psi-rank") {
    const int top = c.levels.empty() ? 8 : c.levels.back();
    const auto ranks = psi_rank_profile(g, top);
    std::vector<int> rotor;
    bool rotor_ok = true;
    for (int n = 0; n <= top; ++n) {
      rotor.push_back(psi_rank_profile(q_n_generators(g.degree(), n + 1), g.degree(), n).back());
      rotor_ok = rotor_ok && rotor.back() == n + 1;
    }
    int n0 = top;
    while (n0 > 0 && ranks[static_cast<std::size_t>(n0 - 1)] == ranks.back()) --n0;
    const bool bounded = n0 < top;
    r.result = {{"group", g.name}, {"group_ranks", ranks}, {"rotor_ranks", rotor},
                {"stable_from", n0}, {"rotor_full_rank", rotor_ok}, {"group_stable", bounded}};
    r.columns = {"n", "group_rank", "rotor_rank"};
    for (int n = 0; n <= top; ++n) {
      r.rows.push_back({std::to_string(n), std::to_string(ranks[static_cast<std::size_t>(n)]),
                        std::to_string(rotor[static_cast<std::size_t>(n)])});
    }
    set_verdict(r, rotor_ok && bounded ? kPass : kFail);
    return r;
  }
  Outcome<StabCertificate> out;
  if (c.action == "branching-lemma") {
    const int m = c.m ? *c.m : discovered_m(g);
    const int n = c.n.value_or(1);
    const int level = c.levels.empty() ? m + n + 1 : c.levels.back();
    out = verify_branching_lemma(g, m, n, level, c.budget.value_or(64));
  } else if (c.action == "samestabs") {
    const int n = c.n.value_or(1);
    const int m = c.m ? *c.m : discovered_m(g);
    const int level = c.levels.empty() ? n + m + 1 : c.levels.back();
    out = verify_samestabs(g, n, m, level);
  } else {
    throw UsageError("unknown lemma '" + c.action + "' (branching-lemma, samestabs, psi-rank)");
  }
  if (auto* inc = std::get_if<Inconclusive>(&out)) {
    r.result = {{"group", g.name}, {"stage", inc->stage}, {"reason", inc->reason}};
    set_verdict(r, kInconclusive);
    return r;
  }
  const auto& cert = std::get<StabCertificate>(out);
  if (rc) rc->add(recheck(cert, g), "certificate recheck");
  r.result = {{"group", g.name}, {"certificate", certificate_json(cert)}};
  r.columns = {"lemma", "m", "n", "level", "verdict", "lhs_order", "rhs_order", "witness"};
  r.rows.push_back({cert.lemma, std::to_string(cert.m), std::to_string(cert.n),
                    std::to_string(cert.level), to_string(cert.verdict), big(cert.lhs_order),
                    big(cert.rhs_order), cert.witness ? cert.witness->cycle_string() : ""});
  set_verdict(r, cert.verdict == StabCertificate::Verdict::Equal ? kPass : kFail);
  return r;
}

// tower

json index_check_json(const LevelIndexCheck& ic) {
  json cert = nullptr;
  if (ic.certificate) {
    const auto& cc = *ic.certificate;
    cert = {{"argument", to_string(cc.argument)},  {"a_order", big(cc.a_order)},
            {"b_order", big(cc.b_order)},          {"intersection_order", big(cc.intersection_order)},
            {"index_a", big(cc.index_a)},          {"index_b", big(cc.index_b)},
            {"com_index", big(cc.com_index)}};
  }
  return {{"level", ic.level},
          {"outside", ic.outside},
          {"normalizes", ic.normalizes},
          {"power_inside", ic.power_inside},
          {"h_in_gamma", ic.h_in_gamma},
          {"index", big(ic.index)},
          {"com_index", big(ic.com_index)},
          {"certificate", cert}};
}

Report run_tower(const RunConfig& c, Rechecks* rc) {
  auto g = load_group(c);
  TowerOptions opts;
  opts.k = c.k;
  opts.count = c.count;
  if (c.budget) opts.gamma.budget = *c.budget;
  const Tower t = build_extension_tower(g, opts);
  if (rc) {
    auto rep = recheck(t, g);
    rc->add(rep.ok, "tower recheck");
    for (const auto& f : rep.failures) rc->notes.push_back("  " + f);
  }
  const auto names = tower_input_names(t, g);
  json hw = json::array();
  for (const Word& w : t.h_words) hw.push_back(g.system->format_word(w));
  json entries = json::array();
  bool all = true;
  Report r;
  r.columns = {"index", "depth", "n", "working_level", "method", "gamma", "index_p",
               "com_index", "consistent", "distinct", "passed"};
  for (const auto& e : t.entries) {
    json checks = json::array();
    for (const auto& ic : e.index_checks) checks.push_back(index_check_json(ic));
    json dist = json::array();
    bool distinct = true;
    for (const auto& w : e.distinctness) {
      dist.push_back({{"against", w.against}, {"level", w.level}, {"outside", w.outside}});
      distinct = distinct && w.outside;
    }
    json ext = hw;
    ext.push_back(format_gamma(e, g));
    const bool passed = e.passed();
    all = all && passed;
    entries.push_back({{"index", e.index},
                       {"depth", e.depth},
                       {"gamma", format_gamma(e, g)},
                       {"gamma_tried", e.gamma_tried},
                       {"gamma_outside_level", e.gamma_level},
                       {"previous_n", e.previous_n},
                       {"working_level", e.working_level},
                       {"n", e.n},
                       {"method", to_string(e.method)},
                       {"h", e.h.format(names)},
                       {"h_expanded_length", big(e.h.expanded_length())},
                       {"extension_generators", ext},
                       {"cosets_explored", e.cosets_explored},
                       {"transversal_position", e.transversal_position},
                       {"certificate_levels", checks},
                       {"consistent", e.consistent},
                       {"expected_com_index", big(e.expected_com_index)},
                       {"distinctness", dist},
                       {"passed", passed}});
    const auto& first = e.index_checks.front();
    r.rows.push_back({std::to_string(e.index), std::to_string(e.depth), std::to_string(e.n),
                      std::to_string(e.working_level), to_string(e.method), format_gamma(e, g),
                      big(first.index), big(first.com_index), e.consistent ? "true" : "false",
                      distinct ? "true" : "false", passed ? "true" : "false"});
  }
  r.result = {{"group", g.name},
              {"k", t.k},
              {"p", t.p},
              {"stab_level", t.stab_level},
              {"extra_levels", t.extra_levels},
              {"base_level", t.base_level},
              {"h_generators", hw},
              {"h_index", big(t.h_index)},
              {"best_effort", t.best_effort},
              {"entries", entries},
              {"complete", t.complete(c.count)},
              {"diagnostics", t.diagnostics}};
  set_verdict(r, t.complete(c.count) && all ? kPass : kFail);
  return r;
}

// adding machine and dihedral

Report run_adding_machine(const RunConfig& c) {
  if (!c.n) throw UsageError("adding-machine needs --n");
  if (c.xs.empty()) throw UsageError("adding-machine needs --xs");
  const auto rep = adding_machine_family(c.xs, *c.n);
  Report r;
  r.columns = {"x", "residue", "order_two", "inverts_tau", "group_order", "index_two"};
  json members = json::array();
  for (const auto& m : rep.members) {
    members.push_back({{"x", m.x},
                       {"residue", m.residue},
                       {"involution", m.involution.cycle_string()},
                       {"order_two", m.order_two},
                       {"inverts_tau", m.inverts_tau},
                       {"group_order", big(m.group_order)},
                       {"index_two", m.index_two}});
    r.rows.push_back({std::to_string(m.x), std::to_string(m.residue), m.order_two ? "true" : "false",
                      m.inverts_tau ? "true" : "false", big(m.group_order),
                      m.index_two ? "true" : "false"});
  }
  r.result = {{"level", rep.level},
              {"a_order", big(rep.a_order)},
              {"members", members},
              {"pairwise_distinct", rep.pairwise_distinct},
              {"subgroups_coincide", rep.subgroups_coincide}};
  set_verdict(r, rep.passed() ? kPass : kFail);
  return r;
}

Report run_dihedral(const RunConfig& c) {
  const int n = c.n ? *c.n : (c.levels.empty() ? 0 : c.levels.back());
  if (n == 0) throw UsageError("dihedral needs --n");
  const auto rep = dihedral_checks(n);
  Report r;
  r.result = {{"level", rep.level},
              {"order", big(rep.order)},
              {"delta_involution", rep.delta_involution},
              {"inverts_tau", rep.inverts_tau},
              {"dihedral", rep.dihedral},
              {"tau_order", big(rep.tau_order)},
              {"index_two_subgroups", rep.index_two_subgroups},
              {"normalizer_order", rep.normalizer_order ? json(big(*rep.normalizer_order)) : json(nullptr)},
              {"normalizer_note", rep.normalizer_note}};
  r.columns = {"level", "order", "dihedral", "index_two_subgroups", "normalizer_order"};
  r.rows.push_back({std::to_string(rep.level), big(rep.order), rep.dihedral ? "true" : "false",
                    std::to_string(rep.index_two_subgroups),
                    rep.normalizer_order ? big(*rep.normalizer_order) : ""});
  set_verdict(r, rep.passed() ? kPass : kFail);
  return r;
}

// laws

std::vector<SelfSimilarGroup> law_groups(const RunConfig& c) {
  if (!c.group.empty() || !c.group_file.empty()) return {load_group(c)};
  std::vector<SelfSimilarGroup> out;
  for (const auto& e : catalog_entries()) {
    CatalogParams params;
    if (e.name == "gs_variant") params = {7, {1, 0, 3, 6}};
    if (e.name == "egs") params = {3, {1, 2}};
    out.push_back(builtin(e.name, params));
  }
  return out;
}

Report run_laws(const RunConfig& c) {
  Report r;
  r.columns = {"group", "checks", "failures"};
  json groups = json::array();
  std::size_t total = 0;
  bool ok = true;
  const std::size_t samples = c.count > 0 ? static_cast<std::size_t>(c.count) : 0;
  for (const auto& g : law_groups(c)) {
    auto rep = check_recursion_laws(g.system, c.seed, samples);
    total += rep.checks;
    ok = ok && rep.passed();
    groups.push_back({{"group", g.name}, {"checks", rep.checks}, {"failures", rep.failures}});
    r.rows.push_back({g.name, std::to_string(rep.checks), std::to_string(rep.failures.size())});
  }
  r.result = {{"groups", groups}, {"total_checks", total}};
  set_verdict(r, ok ? kPass : kFail);
  return r;
}

Report run(const RunConfig& c, Rechecks* rc) {
  if (c.format != "json" && c.format != "csv") throw UsageError("--format must be json or csv");
  if (c.command == "catalog") return run_catalog(c);
  if (c.command == "quotient") return run_quotient(c);
  if (c.command == "verify") return run_verify(c, rc);
  if (c.command == "tower") return run_tower(c, rc);
  if (c.command == "adding-machine") return run_adding_machine(c);
  if (c.command == "dihedral") return run_dihedral(c);
  if (c.command == "laws") return run_laws(c);
  throw UsageError("unknown command '" + c.command + "'");
}

RunConfig config_from_report(const std::string& text) {
  if (!text.empty() && text.front() == '#') {
    std::istringstream in(text);
    std::string line;
    const std::string key = "# run_config: ";
    while (std::getline(in, line)) {
      if (line.rfind(key, 0) == 0) return RunConfig::from_json(json::parse(line.substr(key.size())));
    }
    throw UsageError("report has no run_config line");
  }
  const json doc = json::parse(text);
  if (doc.value("schema_version", 0) != kSchemaVersion) throw UsageError("unsupported schema_version");
  return RunConfig::from_json(doc.at("run_config"));
}

int replay(const std::string& path) {
  const std::string stored = read_file(path);
  RunConfig c;
  try {
    c = config_from_report(stored);
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed report: ") + e.what());
  }
  Rechecks rc;
  const Report r = run(c, &rc);
  const std::string fresh = render(c, r);
  const bool same = fresh == stored;
  std::cout << "replay " << path << ": command " << c.command << ", verdict " << r.verdict << "\n";
  if (same) {
    std::cout << "report: identical (" << stored.size() << " bytes)\n";
  } else {
    std::size_t i = 0;
    while (i < fresh.size() && i < stored.size() && fresh[i] == stored[i]) ++i;
    std::cout << "report: DIFFERS at byte " << i << "\n";
  }
  for (const auto& note : rc.notes) std::cout << note << "\n";
  return same && rc.ok ? kPass : kFail;
}

std::vector<int> parse_levels(const std::string& s) {
  std::vector<int> out;
  if (s.empty()) return out;
  if (auto dots = s.find(".."); dots != std::string::npos) {
    const int a = std::stoi(s.substr(0, dots));
    const int b = std::stoi(s.substr(dots + 2));
    if (a > b) throw UsageError("empty level range " + s);
    for (int n = a; n <= b; ++n) out.push_back(n);
    return out;
  }
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ssg: exact computation with self-similar groups"};
  app.require_subcommand(1);
  RunConfig c;
  std::string levels_text;
  std::optional<int> level;
  std::string replay_path;
  std::string group_positional;

  auto group_opts = [&](CLI::App* sub, bool positional) {
    if (positional) sub->add_option("name", group_positional, "catalog group name");
    sub->add_option("--group", c.group, "catalog group name");
    sub->add_option("--group-file", c.group_file, "recursion file (JSON)");
    sub->add_option("--p", c.p, "prime parameter");
    sub->add_option("--vector", c.vector, "defining vector")->delimiter(',');
  };
  auto output_opts = [&](CLI::App* sub) {
    sub->add_option("--out", c.out, "write the report to this file");
    sub->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  };
  auto level_opts = [&](CLI::App* sub) {
    sub->add_option("--level", level, "single level");
    sub->add_option("--levels", levels_text, "levels: a..b or a,b,c");
  };

  auto* catalog = app.add_subcommand("catalog", "list groups or show one");
  catalog->add_option("action", c.action, "list or show")->required()->check(CLI::IsMember({"list", "show"}));
  group_opts(catalog, true);
  output_opts(catalog);

  auto* quotient = app.add_subcommand("quotient", "orders of level quotients");
  group_opts(quotient, true);
  level_opts(quotient);
  output_opts(quotient);

  auto* verify = app.add_subcommand("verify", "verify a lemma at a finite level");
  verify->add_option("lemma", c.action, "branching-lemma, samestabs or psi-rank")->required();
  group_opts(verify, true);
  level_opts(verify);
  verify->add_option("--m", c.m, "stab-in-K level");
  verify->add_option("--n", c.n, "depth n");
  verify->add_option("--budget", c.budget, "Schreier word length budget");
  output_opts(verify);

  auto* tower = app.add_subcommand("tower", "extension tower of index-p overgroups");
  group_opts(tower, true);
  tower->add_option("--k", c.k, "H has index p^(k-1) in G");
  tower->add_option("--count", c.count, "number of entries");
  tower->add_option("--budget", c.budget, "gamma search budget (tuples)");
  output_opts(tower);

  auto* adding = app.add_subcommand("adding-machine", "normalizer family of the adding machine");
  adding->add_option("--n", c.n, "level")->required();
  adding->add_option("--xs", c.xs, "exponents x")->delimiter(',')->required();
  output_opts(adding);

  auto* dihedral = app.add_subcommand("dihedral", "checks for <delta, tau>");
  dihedral->add_option("--n", c.n, "level");
  level_opts(dihedral);
  output_opts(dihedral);

  auto* laws = app.add_subcommand("laws", "randomized wreath recursion laws");
  group_opts(laws, false);
  laws->add_option("--seed", c.seed, "random seed");
  laws->add_option("--count", c.count, "samples per group");
  output_opts(laws);

  auto* rep = app.add_subcommand("replay", "re-run a report and compare");
  rep->add_option("report", replay_path, "report file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (rep->parsed()) return replay(replay_path);
    c.command = app.get_subcommands().front()->get_name();
    if (!group_positional.empty()) {
      if (!c.group.empty() && c.group != group_positional) throw UsageError("two different groups given");
      c.group = group_positional;
    }
    if (c.command == "laws" && laws->count("--count") == 0) c.count = 100;
    c.levels = parse_levels(levels_text);
    if (level) c.levels = {*level};
    Report r = run(c, nullptr);
    const std::string text = render(c, r);
    if (c.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(c.out, std::ios::binary);
      if (!out) throw UsageError("cannot write " + c.out);
      out << text;
      std::cout << c.command << ": " << r.verdict << " (report written to " << c.out << ")\n";
    }
    return r.exit;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: bad number: " << e.what() << "\n";
    return kUsage;
  }
}
