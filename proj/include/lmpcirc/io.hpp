#pragma once

#include <lmpcirc/analysis.hpp>
#include <lmpcirc/circuit.hpp>
#include <lmpcirc/dcopf.hpp>
#include <lmpcirc/network.hpp>

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace lmpc {

using Json = nlohmann::ordered_json;

/// Malformed or schema-invalid input. line/column are 1-based, 0 when unknown.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t line, std::size_t column);
  std::size_t line = 0;
  std::size_t column = 0;
};

/**
 * Parses the canonical network file:
 *
 *   {"buses":     [{"id": 0, "demand": 0.0}, ...],
 *    "lines":     [{"from": 0, "to": 1, "susceptance": 1.0, "flow_limit": 30.0}, ...],
 *    "injectors": [{"bus": 0, "kind": "generator", "cost": 0.0, "p_min": 0.0, "p_max": 200.0}, ...]}
 *
 * `flow_limit` is optional; unknown keys are rejected. Susceptances are per
 * unit on a 1 MVA base, so MW and per-unit power coincide. Structural errors
 * surface as NetworkError, everything else as FormatError.
 */
Network parse_network(std::string_view text);

/// {"topology": {"lines": [{from, to, susceptance}]}, "sources": [{from, to, mu}], "ground"?, "offset"?}
LimitedInfo parse_limited_info(std::string_view text);

Json to_json(const Network& net);
Json to_json(const Network& net, const DcopfSolution& sol);
Json to_json(const EquivalentCircuit& c);
Json to_json(const CheckReport& r);
Json to_json(const RecoveredPrices& r);
Json to_json(const NegativePriceReport& r);
Json to_json(const EquivalentCircuit& c, const CongestionImpact& impact);

/// Netlist text, one element per line. Nodes are labelled from 1.
std::string netlist(const EquivalentCircuit& c, bool voltage_sources);

/// Pretty-printed JSON with every float rounded to 9 significant digits.
std::string dump(const Json& j);

}  // namespace lmpc
