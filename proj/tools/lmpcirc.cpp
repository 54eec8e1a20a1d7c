#include <lmpcirc/analysis.hpp>
#include <lmpcirc/format.hpp>
#include <lmpcirc/io.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>

using namespace lmpc;

namespace {

enum Exit { kOk = 0, kBadInput = 1, kInfeasible = 2, kUnbounded = 3, kNoCircuit = 4, kCheckFailed = 5 };

struct RunConfig {
  std::string command;
  std::string input;
  std::string output;
  std::string format = "json";
  double tol = 1e-7;
  std::optional<Index> ref_bus;
  bool voltage_sources = false;
  std::uint64_t seed = 1;
  Index n = 7;
  double edge_prob = 0.3;
};

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), {});
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path, 0, 0);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_output(const RunConfig& cfg, const std::string& text) {
  if (cfg.output.empty() || cfg.output == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.output, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + cfg.output);
  out << text;
}

// Left-aligned columns sized to their widest cell.
std::string table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> width;
  auto display = [](const std::string& s) {
    size_t n = 0;
    for (unsigned char ch : s) n += (ch & 0xC0) != 0x80;
    return n;
  };
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (size_t k = 0; k < r.size(); ++k) width[k] = std::max(width[k], display(r[k]));
  }
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (size_t k = 0; k < r.size(); ++k) {
      line += r[k];
      if (k + 1 < r.size()) line += std::string(width[k] - display(r[k]) + 2, ' ');
    }
    line.erase(line.find_last_not_of(' ') + 1);
    out += line + "\n";
  }
  return out;
}

std::string edge_label(Index from, Index to) { return bus_label(from) + "->" + bus_label(to); }

struct Solved {
  Network net;
  DcopfSolution sol;
};

Solved load_and_solve(const RunConfig& cfg) {
  Network net = parse_network(read_input(cfg.input));
  OpfOptions opt;
  if (cfg.ref_bus) {
    if (*cfg.ref_bus < 0 || *cfg.ref_bus >= net.num_buses()) throw NetworkError("--ref-bus is not a bus of the network");
    opt.reference_bus = *cfg.ref_bus;
  }
  DcopfSolution sol = solve_opf(net, opt);
  return {std::move(net), std::move(sol)};
}

int cmd_solve(const RunConfig& cfg) {
  const auto [net, sol] = load_and_solve(cfg);
  if (cfg.format == "json") {
    write_output(cfg, dump(to_json(net, sol)));
    return kOk;
  }
  std::vector<bool> marginal(static_cast<size_t>(net.num_buses()), false);
  for (Index k : sol.marginal) marginal[static_cast<size_t>(net.injectors()[static_cast<size_t>(k)].bus)] = true;

  std::string out = "objective: " + format_number(sol.objective) + "\n\n";
  std::vector<std::vector<std::string>> buses{{"bus", "lmp", "marginal"}};
  for (Index i = 0; i < net.num_buses(); ++i)
    buses.push_back({bus_label(i), format_number(sol.lmp(i)), marginal[static_cast<size_t>(i)] ? "*" : ""});
  out += table(buses) + "\n";

  const Eigen::VectorXd flows = line_flows(net, sol.theta);
  std::vector<std::string> mu(net.lines().size(), "");
  for (const LineCongestion& c : sol.congestion)
    if (c.value > 0) mu[static_cast<size_t>(c.line)] = format_number(c.value) + " (" + edge_label(c.from, c.to) + ")";
  std::vector<std::vector<std::string>> lines{{"line", "flow", "limit", "mu"}};
  for (size_t k = 0; k < net.lines().size(); ++k) {
    const Line& l = net.lines()[k];
    lines.push_back({edge_label(l.from, l.to), format_number(flows(static_cast<Index>(k))),
                     l.flow_limit ? format_number(*l.flow_limit) : "-", mu[k]});
  }
  out += table(lines);
  if (sol.degenerate) out += "\nnote: degenerate optimum, duals are one of several valid choices\n";
  write_output(cfg, out);
  return kOk;
}

int cmd_circuit(const RunConfig& cfg) {
  const auto [net, sol] = load_and_solve(cfg);
  const EquivalentCircuit c = build_circuit(net, sol, cfg.tol);
  if (cfg.format == "json") {
    Json j = to_json(c);
    j["netlist"] = netlist(c, cfg.voltage_sources);
    write_output(cfg, dump(j));
  } else {
    std::string out = netlist(c, cfg.voltage_sources);
    if (c.radial()) out += "* radial network: no loops, outside the meshed scope\n";
    write_output(cfg, out);
  }
  return kOk;
}

int cmd_check(const RunConfig& cfg) {
  const auto [net, sol] = load_and_solve(cfg);
  const CheckReport report = verify_optimality(net, sol, cfg.tol);
  bool pass = report.all_pass();

  const double price_scale = 1 + sol.lmp.cwiseAbs().maxCoeff();
  const double loop_tol = cfg.tol * price_scale;

  std::vector<KclBalance> ledger;
  std::string kcl_notice;
  try {
    const EquivalentCircuit c = build_circuit(net, sol, cfg.tol);
    const CircuitSolution s = solve_circuit(c);
    ledger = kcl_ledger(c, s);
    for (const KclBalance& b : ledger) pass = pass && std::abs(b.residual) <= loop_tol;
  } catch (const NoCongestion&) {
    kcl_notice = "no congestion: the circuit has no sources and every LMP is equal";
  } catch (const NoMarginalInjector&) {
    kcl_notice = "no marginal injector: the circuit has no ground";
  }
  const std::vector<LoopSum> loops = kvl_loop_sums(net, sol.lmp);
  for (const LoopSum& l : loops) pass = pass && std::abs(l.sum) <= loop_tol;

  if (cfg.format == "json") {
    Json j = to_json(report);
    j["kcl"] = Json::array();
    for (const KclBalance& b : ledger)
      j["kcl"].push_back({{"node", b.node}, {"in", b.inflows}, {"out", b.outflows}, {"residual", b.residual}});
    if (!kcl_notice.empty()) j["kcl_notice"] = kcl_notice;
    j["kvl"] = Json::array();
    for (const LoopSum& l : loops) j["kvl"].push_back({{"nodes", l.nodes}, {"sum", l.sum}});
    j["pass"] = pass;
    write_output(cfg, dump(j));
    return pass ? kOk : kCheckFailed;
  }

  std::string out = "optimality residuals (tol " + format_number(cfg.tol) + ")\n";
  std::vector<std::vector<std::string>> rows;
  for (const ResidualBlock& b : report.blocks) rows.push_back({"  " + b.name, format_number(b.norm), b.pass ? "✓" : "✗"});
  rows.push_back({"  duality gap", format_number(report.duality_gap), report.gap_pass ? "✓" : "✗"});
  out += table(rows);
  out += "\nKCL\n";
  if (!kcl_notice.empty()) out += "  " + kcl_notice + "\n";
  for (const KclBalance& b : ledger) out += "  " + format_kcl(b, loop_tol) + "\n";
  out += "\nKVL\n";
  if (loops.empty()) out += "  no cycles: radial network, outside the meshed scope\n";
  for (const LoopSum& l : loops) out += "  " + format_loop(l.nodes, sol.lmp, loop_tol) + "\n";
  out += pass ? "\nall checks pass\n" : "\nCHECK FAILED\n";
  write_output(cfg, out);
  return pass ? kOk : kCheckFailed;
}

int cmd_superpose(const RunConfig& cfg) {
  const auto [net, sol] = load_and_solve(cfg);
  const EquivalentCircuit c = build_circuit(net, sol, cfg.tol);
  const CongestionImpact impact = congestion_impact(c, cfg.tol);
  if (cfg.format == "json") {
    write_output(cfg, dump(to_json(c, impact)));
    return kOk;
  }
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head{"bus"};
  for (const CurrentSource& s : c.sources())
    head.push_back(edge_label(s.from, s.to) + " " + format_number(s.amps) + "A");
  head.push_back("total");
  head.push_back("lmp");
  rows.push_back(head);
  for (Index i = 0; i < c.num_nodes(); ++i) {
    std::vector<std::string> r{bus_label(i)};
    for (const SourceImpact& s : impact.sources) r.push_back(format_number(s.contribution(i)));
    r.push_back(format_number(impact.total(i)));
    r.push_back(format_number(impact.total(i) + c.offset()));
    rows.push_back(r);
  }
  std::vector<std::vector<std::string>> summary{{"source", "min", "max", "negative buses"}};
  for (const SourceImpact& s : impact.sources) {
    const CurrentSource& src = c.sources()[static_cast<size_t>(s.source)];
    std::string negative;
    for (Index b : s.negative_nodes) negative += (negative.empty() ? "" : " ") + bus_label(b);
    summary.push_back({edge_label(src.from, src.to), format_number(s.min), format_number(s.max),
                       negative.empty() ? "-" : negative});
  }
  write_output(cfg, "ground: bus " + bus_label(c.ground()) + ", offset " + format_number(c.offset()) + "\n\n" +
                        table(rows) + "\n" + table(summary));
  return kOk;
}

int cmd_predict_negative(const RunConfig& cfg) {
  const auto [net, sol] = load_and_solve(cfg);
  const EquivalentCircuit c = build_circuit(net, sol, cfg.tol);
  const NegativePriceReport r = predict_negative_prices(c, solve_circuit(c), cfg.tol);
  if (cfg.format == "json") {
    write_output(cfg, dump(to_json(r)));
    return kOk;
  }
  std::string out = "negative prices: ";
  if (r.negative) {
    out += "YES (";
    for (size_t k = 0; k < r.witnesses.size(); ++k) {
      if (k > 0) out += "; ";
      out += "bus " + bus_label(r.witnesses[k]) + ", λ=" + format_number(r.witness_prices[k]);
    }
    out += ")\n";
  } else {
    out += "NO (lowest λ=" + format_number(r.min_price) + " at bus " + bus_label(r.min_node) + ")\n";
  }
  out += std::string("ground is the lowest-voltage node: ") + (r.ground_is_minimum ? "yes" : "no") + "\n";
  write_output(cfg, out);
  return kOk;
}

int cmd_recover(const RunConfig& cfg) {
  const LimitedInfo info = parse_limited_info(read_input(cfg.input));
  const RecoveredPrices r = recover_lmps(info);
  if (cfg.format == "json") {
    write_output(cfg, dump(to_json(r)));
    return kOk;
  }
  std::string out;
  if (r.lmp) {
    std::vector<std::vector<std::string>> rows{{"bus", "lmp"}};
    for (Index i = 0; i < r.lmp->size(); ++i) rows.push_back({bus_label(i), format_number((*r.lmp)(i))});
    out = table(rows);
  } else {
    out = "ground and offset not both known: only price differences λi - λj\n\n";
    std::vector<std::vector<std::string>> rows{{""}};
    for (Index j = 0; j < r.differences.cols(); ++j) rows[0].push_back(bus_label(j));
    for (Index i = 0; i < r.differences.rows(); ++i) {
      std::vector<std::string> row{bus_label(i)};
      for (Index j = 0; j < r.differences.cols(); ++j) row.push_back(format_number(r.differences(i, j)));
      rows.push_back(row);
    }
    out += table(rows);
  }
  write_output(cfg, out);
  return kOk;
}

int cmd_gen(const RunConfig& cfg) {
  write_output(cfg, dump(to_json(generate_random_network(cfg.seed, cfg.n, cfg.edge_prob))));
  return kOk;
}

int run(const RunConfig& cfg) {
  try {
    if (cfg.command == "solve") return cmd_solve(cfg);
    if (cfg.command == "circuit") return cmd_circuit(cfg);
    if (cfg.command == "check") return cmd_check(cfg);
    if (cfg.command == "superpose") return cmd_superpose(cfg);
    if (cfg.command == "predict-negative") return cmd_predict_negative(cfg);
    if (cfg.command == "recover") return cmd_recover(cfg);
    if (cfg.command == "gen") return cmd_gen(cfg);
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const NetworkError& e) {
    std::cerr << "error: invalid network: " << e.what() << "\n";
    return kBadInput;
  } catch (const CircuitError& e) {
    std::cerr << "error: invalid circuit: " << e.what() << "\n";
    return kBadInput;
  } catch (const OpfInfeasible& e) {
    const InfeasibilityDiagnostics& d = e.diagnostics;
    std::cerr << "error: infeasible\n"
              << "  demand " << format_number(d.total_demand) << " MW, capacity " << format_number(d.total_capacity)
              << " MW, unserved " << format_number(d.unserved) << " MW\n";
    if (!d.short_buses.empty()) {
      std::cerr << "  short buses:";
      for (Index b : d.short_buses) std::cerr << ' ' << bus_label(b);
      std::cerr << "\n";
    }
    if (!d.cut_lines.empty()) {
      std::cerr << "  saturated cut lines:";
      for (Index l : d.cut_lines) std::cerr << ' ' << l + 1;
      std::cerr << "\n";
    }
    return kInfeasible;
  } catch (const OpfUnbounded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnbounded;
  } catch (const NoCongestion& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNoCircuit;
  } catch (const NoMarginalInjector& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNoCircuit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
  return kBadInput;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DC-OPF prices as an equivalent DC circuit"};
  app.require_subcommand(1, 1);
  RunConfig cfg;

  auto common = [&](CLI::App* sub, bool network_input) {
    sub->add_option("--input", cfg.input, network_input ? "network JSON (default stdin)" : "input JSON (default stdin)");
    sub->add_option("--output", cfg.output, "output file (default stdout)");
    sub->add_option("--format", cfg.format, "json or text")->check(CLI::IsMember({"json", "text"}));
    sub->add_option("--tol", cfg.tol, "tolerance")->check(CLI::PositiveNumber);
  };
  for (const char* name : {"solve", "circuit", "check", "superpose", "predict-negative"}) {
    CLI::App* sub = app.add_subcommand(name);
    common(sub, true);
    sub->add_option("--ref-bus", cfg.ref_bus, "angle reference bus (0-based id)");
    if (std::string(name) == "circuit")
      sub->add_flag("--voltage-sources", cfg.voltage_sources, "emit voltage sources in series instead");
  }
  common(app.add_subcommand("recover", "price recovery from topology and congestion prices"), false);
  CLI::App* gen = app.add_subcommand("gen", "seeded random meshed network");
  gen->add_option("--output", cfg.output, "output file (default stdout)");
  gen->add_option("--seed", cfg.seed, "random seed");
  gen->add_option("-n", cfg.n, "number of buses")->check(CLI::Range(static_cast<Index>(3), static_cast<Index>(2000)));
  gen->add_option("--edge-prob", cfg.edge_prob, "probability of each extra line")->check(CLI::Range(0.0, 1.0));

  CLI11_PARSE(app, argc, argv);
  cfg.command = app.get_subcommands().front()->get_name();
  return run(cfg);
}
