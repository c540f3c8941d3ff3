#include <CLI11.hpp>

#include <lxm/gen.hpp>
#include <lxm/io.hpp>

#include <fstream>
#include <iostream>

using namespace lxm;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kNegative = 2;  // no equilibrium, or violations found

void write_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(Errc::InvalidInput, "cannot write " + path);
  out << j.dump(2) << "\n";
}

int cmd_solve(const std::string& instance, const std::string& out_path, const std::string& trace_path,
              const std::string& seed_path) {
  Market mk = market_from_json(read_json_file(instance));
  SolveOptions opt;
  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path);
    if (!trace) throw Error(Errc::InvalidInput, "cannot write " + trace_path);
    opt.sink = [&](const PhaseTrace& t) { trace << trace_to_json(t).dump() << "\n"; };
  }
  if (!seed_path.empty()) opt.seed_prices = prices_from_json(read_json_file(seed_path), mk.n());
  auto rep = solve(mk, opt);
  if (rep.status == SolveReport::Status::NoEquilibrium) {
    json w = json::array();
    for (int i : rep.witness) w.push_back(i + 1);
    std::cerr << "no equilibrium: agent " << rep.witness.at(0) + 1
              << " forms a singleton strongly connected component without a self-loop\n";
    write_json({{"status", "NoEquilibrium"}, {"witness", w}}, out_path);
    return kNegative;
  }
  write_json(report_to_json(rep), out_path);
  return kOk;
}

int cmd_check(const std::string& instance, const std::string& result) {
  Market mk = market_from_json(read_json_file(instance));
  json r = read_json_file(result);
  Vec p = prices_from_json(r, mk.n());
  Flow f = flow_from_json(r.at("flow"), mk.n());
  auto v = check_equilibrium(mk, p, f);
  for (const auto& x : v) std::cout << x.str() << "\n";
  if (!v.empty()) return kNegative;
  std::cout << "ok\n";
  return kOk;
}

int cmd_gen(const GenOptions& o) {
  std::cout << market_to_json(generate_market(o)).dump(2) << "\n";
  return kOk;
}

int cmd_boost(const std::string& instance, const std::string& edges, bool dump_lp) {
  Market mk = market_from_json(read_json_file(instance));
  EdgeSet F = edges_from_json(read_json_file(edges), mk);
  json out;
  auto dec = decompose(mk, F);
  auto pf = build_pf(mk, F, dec);
  auto ap = approx(pf.M, pf.gamma, pf.lambda);
  auto qf = solve_max(assemble_qf(pf, ap));
  const char* tags[] = {"PointwiseMax", "Infeasible", "Unbounded"};
  out["components"] = dec.t;
  out["qf"] = tags[static_cast<int>(qf.tag)];
  if (qf.tag == M2VPIOutcome::Tag::PointwiseMax) out["pbar_max"] = prices_to_json(qf.x);
  if (qf.tag == M2VPIOutcome::Tag::Unbounded) out["ray"] = prices_to_json(qf.ray);
  if (dump_lp) {
    out["pf"] = pf_to_json(pf);
    out["approx"] = approx_to_json(ap);
  }
  int code = kOk;
  try {
    auto br = boost(mk, F);
    out["result"] = boost_tag_name(br.tag);
    out["pbar"] = prices_to_json(br.pbar);
    out["prices"] = prices_to_json(br.p);
    out["flow"] = flow_to_json(br.f);
    out["max_good_surplus"] = to_string(norm_inf(surplus(br.p, br.f).s));
  } catch (const Error& e) {
    out["error"] = e.what();
    code = kFailure;
  }
  std::cout << out.dump(2) << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact equilibria of linear exchange markets"};
  app.require_subcommand(1);

  std::string instance, result, out_path, trace_path, seed_path, edges_path;
  auto* solve_cmd = app.add_subcommand("solve", "Compute an equilibrium");
  solve_cmd->add_option("instance", instance, "Instance JSON")->required();
  solve_cmd->add_option("--out", out_path, "Result file (default: standard output)");
  solve_cmd->add_option("--trace", trace_path, "Write one JSON line per DM phase");
  solve_cmd->add_option("--seed-prices", seed_path, "Start the first DM run from these prices");

  auto* check_cmd = app.add_subcommand("check", "Verify a result against an instance");
  check_cmd->add_option("instance", instance, "Instance JSON")->required();
  check_cmd->add_option("result", result, "Result JSON")->required();

  GenOptions gen;
  std::string density = "1/2";
  auto* gen_cmd = app.add_subcommand("gen", "Generate a random instance");
  gen_cmd->add_option("--n", gen.n, "Number of agents")->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--density", density, "Edge probability as a rational string");
  gen_cmd->add_option("--max-u", gen.max_u, "Largest integer utility")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_flag("--ensure-strongly-connected", gen.strongly_connected, "Add a random Hamiltonian cycle");

  bool dump_lp = false;
  auto* boost_cmd = app.add_subcommand("boost", "Run one price boost for a fixed edge set");
  boost_cmd->add_option("instance", instance, "Instance JSON")->required();
  boost_cmd->add_option("--edges", edges_path, "Edge set JSON")->required();
  boost_cmd->add_flag("--dump-lp", dump_lp, "Print the constraint systems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kFailure;
  }

  try {
    if (*solve_cmd) return cmd_solve(instance, out_path, trace_path, seed_path);
    if (*check_cmd) return cmd_check(instance, result);
    if (*gen_cmd) {
      gen.density = parse_rational(density);
      if (gen.density < 0 || gen.density > 1) throw Error(Errc::InvalidInput, "density must lie in [0, 1]");
      return cmd_gen(gen);
    }
    if (*boost_cmd) return cmd_boost(instance, edges_path, dump_lp);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
