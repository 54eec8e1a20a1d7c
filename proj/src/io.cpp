#include <lmpcirc/format.hpp>
#include <lmpcirc/io.hpp>

#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace lmpc {

FormatError::FormatError(const std::string& what, std::size_t l, std::size_t c)
    : std::runtime_error(l > 0 ? "line " + std::to_string(l) + ", column " + std::to_string(c) + ": " + what : what),
      line(l),
      column(c) {}

namespace {

using RawJson = nlohmann::json;

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// Input iterator that reports how far the lexer has read.
class TrackingIterator {
 public:
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  TrackingIterator(const char* p, const char** last) : p_(p), last_(last) {}
  reference operator*() const {
    *last_ = p_;
    return *p_;
  }
  TrackingIterator& operator++() {
    ++p_;
    return *this;
  }
  TrackingIterator operator++(int) {
    auto copy = *this;
    ++p_;
    return copy;
  }
  bool operator==(const TrackingIterator& o) const { return p_ == o.p_; }
  bool operator!=(const TrackingIterator& o) const { return p_ != o.p_; }

 private:
  const char* p_;
  const char** last_;
};

struct Document {
  RawJson root;
  std::string_view text;
  std::map<std::string, std::size_t> positions;

  [[noreturn]] void fail(const std::string& pointer, const std::string& what) const {
    std::size_t line = 0, col = 0;
    auto it = positions.find(pointer);
    if (it == positions.end()) {
      // Fall back to the closest enclosing value.
      std::string p = pointer;
      while (!p.empty() && it == positions.end()) {
        p = p.substr(0, p.rfind('/'));
        it = positions.find(p);
      }
    }
    if (it != positions.end()) std::tie(line, col) = line_column(text, it->second);
    throw FormatError((pointer.empty() ? std::string("document") : pointer) + ": " + what, line, col);
  }
};

class IndexTrackingRecorder : public nlohmann::json_sax<RawJson> {
 public:
  IndexTrackingRecorder(const char* base, const char** last) : base_(base), last_(last) {}
  std::map<std::string, std::size_t> positions;

  bool null() override { return scalar(); }
  bool boolean(bool) override { return scalar(); }
  bool number_integer(number_integer_t) override { return scalar(); }
  bool number_unsigned(number_unsigned_t) override { return scalar(); }
  bool number_float(number_float_t, const string_t&) override { return scalar(); }
  bool string(string_t&) override { return scalar(); }
  bool binary(binary_t&) override { return scalar(); }
  bool start_object(std::size_t) override { return open(true); }
  bool start_array(std::size_t) override { return open(false); }
  bool key(string_t& k) override {
    stack_.back().key = k;
    return true;
  }
  bool end_object() override { return close(); }
  bool end_array() override { return close(); }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override { return false; }

 private:
  struct Frame {
    std::string path;
    bool object;
    std::string key;
    std::size_t index;
  };
  std::string next_path() const {
    if (stack_.empty()) return "";
    const Frame& f = stack_.back();
    return f.path + "/" + (f.object ? f.key : std::to_string(f.index));
  }
  std::size_t offset() const { return static_cast<std::size_t>(*last_ - base_); }
  void bump() {
    if (!stack_.empty() && !stack_.back().object) ++stack_.back().index;
  }
  bool scalar() {
    positions[next_path()] = offset();
    bump();
    return true;
  }
  bool open(bool object) {
    const std::string path = next_path();
    positions[path] = offset();
    stack_.push_back({path, object, "", 0});
    return true;
  }
  bool close() {
    stack_.pop_back();
    bump();
    return true;
  }

  const char* base_;
  const char** last_;
  std::vector<Frame> stack_;
};

Document load(std::string_view text) {
  Document doc;
  doc.text = text;
  try {
    doc.root = RawJson::parse(text.begin(), text.end());
  } catch (const RawJson::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    if (const auto pos = msg.find("column "); pos != std::string::npos) {
      if (const auto colon = msg.find(": ", pos); colon != std::string::npos) msg = msg.substr(colon + 2);
    }
    throw FormatError("malformed JSON: " + msg, line, col);
  }
  const char* last = text.data();
  IndexTrackingRecorder recorder(text.data(), &last);
  RawJson::sax_parse(TrackingIterator(text.data(), &last), TrackingIterator(text.data() + text.size(), &last),
                     &recorder);
  doc.positions = std::move(recorder.positions);
  return doc;
}

void check_keys(const Document& doc, const RawJson& obj, const std::string& ptr, const std::set<std::string>& required,
                const std::set<std::string>& optional = {}) {
  if (!obj.is_object()) doc.fail(ptr, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    if (!required.count(k) && !optional.count(k)) doc.fail(ptr + "/" + k, "unknown key \"" + k + "\"");
  }
  for (const auto& k : required)
    if (!obj.contains(k)) doc.fail(ptr, "missing key \"" + k + "\"");
}

double get_number(const Document& doc, const RawJson& obj, const std::string& ptr, const std::string& key) {
  const RawJson& v = obj.at(key);
  if (!v.is_number()) doc.fail(ptr + "/" + key, "expected a number");
  return v.get<double>();
}

Index get_integer(const Document& doc, const RawJson& obj, const std::string& ptr, const std::string& key) {
  const RawJson& v = obj.at(key);
  if (!v.is_number_integer()) doc.fail(ptr + "/" + key, "expected an integer");
  return v.get<Index>();
}

const RawJson& get_array(const Document& doc, const RawJson& obj, const std::string& ptr, const std::string& key) {
  const RawJson& v = obj.at(key);
  if (!v.is_array()) doc.fail(ptr + "/" + key, "expected an array");
  return v;
}

Json number_map(const Eigen::VectorXd& v) {
  Json out = Json::object();
  for (Index i = 0; i < v.size(); ++i) out[std::to_string(i)] = v(i);
  return out;
}

Json number_list(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

void round_floats(Json& j) {
  if (j.is_number_float()) {
    j = round_significant(j.get<double>());
  } else if (j.is_structured()) {
    for (auto& child : j) round_floats(child);
  }
}

}  // namespace

Network parse_network(std::string_view text) {
  const Document doc = load(text);
  const RawJson& root = doc.root;
  check_keys(doc, root, "", {"buses", "lines", "injectors"});

  std::vector<Bus> buses;
  const RawJson& jb = get_array(doc, root, "", "buses");
  for (std::size_t i = 0; i < jb.size(); ++i) {
    const std::string ptr = "/buses/" + std::to_string(i);
    check_keys(doc, jb[i], ptr, {"id", "demand"});
    buses.push_back({get_integer(doc, jb[i], ptr, "id"), get_number(doc, jb[i], ptr, "demand")});
  }

  std::vector<Line> lines;
  const RawJson& jl = get_array(doc, root, "", "lines");
  for (std::size_t i = 0; i < jl.size(); ++i) {
    const std::string ptr = "/lines/" + std::to_string(i);
    check_keys(doc, jl[i], ptr, {"from", "to", "susceptance"}, {"flow_limit"});
    Line l{get_integer(doc, jl[i], ptr, "from"), get_integer(doc, jl[i], ptr, "to"),
           get_number(doc, jl[i], ptr, "susceptance"), std::nullopt};
    if (jl[i].contains("flow_limit")) l.flow_limit = get_number(doc, jl[i], ptr, "flow_limit");
    lines.push_back(l);
  }

  std::vector<Injector> injectors;
  const RawJson& ji = get_array(doc, root, "", "injectors");
  for (std::size_t i = 0; i < ji.size(); ++i) {
    const std::string ptr = "/injectors/" + std::to_string(i);
    check_keys(doc, ji[i], ptr, {"bus", "kind", "cost", "p_min", "p_max"});
    const RawJson& kind = ji[i].at("kind");
    if (!kind.is_string() || (kind != "generator" && kind != "load"))
      doc.fail(ptr + "/kind", "kind must be \"generator\" or \"load\"");
    injectors.push_back({get_integer(doc, ji[i], ptr, "bus"),
                         kind == "load" ? InjectorKind::Load : InjectorKind::Generator,
                         get_number(doc, ji[i], ptr, "cost"), get_number(doc, ji[i], ptr, "p_min"),
                         get_number(doc, ji[i], ptr, "p_max")});
  }
  return Network(std::move(buses), std::move(lines), std::move(injectors));
}

LimitedInfo parse_limited_info(std::string_view text) {
  const Document doc = load(text);
  const RawJson& root = doc.root;
  check_keys(doc, root, "", {"topology", "sources"}, {"ground", "offset"});
  check_keys(doc, root.at("topology"), "/topology", {"lines"});

  LimitedInfo info;
  const RawJson& jl = get_array(doc, root.at("topology"), "/topology", "lines");
  for (std::size_t i = 0; i < jl.size(); ++i) {
    const std::string ptr = "/topology/lines/" + std::to_string(i);
    check_keys(doc, jl[i], ptr, {"from", "to", "susceptance"});
    info.lines.push_back({get_integer(doc, jl[i], ptr, "from"), get_integer(doc, jl[i], ptr, "to"),
                          get_number(doc, jl[i], ptr, "susceptance")});
  }
  const RawJson& js = get_array(doc, root, "", "sources");
  for (std::size_t i = 0; i < js.size(); ++i) {
    const std::string ptr = "/sources/" + std::to_string(i);
    check_keys(doc, js[i], ptr, {"from", "to", "mu"});
    const double mu = get_number(doc, js[i], ptr, "mu");
    if (!(mu > 0)) doc.fail(ptr + "/mu", "mu must be positive");
    info.sources.push_back({get_integer(doc, js[i], ptr, "from"), get_integer(doc, js[i], ptr, "to"), mu});
  }
  if (root.contains("ground")) info.ground = get_integer(doc, root, "", "ground");
  if (root.contains("offset")) info.offset = get_number(doc, root, "", "offset");
  return info;
}

Json to_json(const Network& net) {
  Json j;
  j["buses"] = Json::array();
  for (const Bus& b : net.buses()) j["buses"].push_back({{"id", b.id}, {"demand", b.demand}});
  j["lines"] = Json::array();
  for (const Line& l : net.lines()) {
    Json jl = {{"from", l.from}, {"to", l.to}, {"susceptance", l.susceptance}};
    if (l.flow_limit) jl["flow_limit"] = *l.flow_limit;
    j["lines"].push_back(jl);
  }
  j["injectors"] = Json::array();
  for (const Injector& g : net.injectors())
    j["injectors"].push_back({{"bus", g.bus},
                              {"kind", g.is_load() ? "load" : "generator"},
                              {"cost", g.cost},
                              {"p_min", g.p_min},
                              {"p_max", g.p_max}});
  return j;
}

Json to_json(const Network& net, const DcopfSolution& sol) {
  Json j;
  j["status"] = "optimal";
  j["objective"] = sol.objective;
  j["lmp"] = number_map(sol.lmp);
  j["mu"] = Json::array();
  for (const LineCongestion& c : sol.congestion)
    j["mu"].push_back({{"from", c.from}, {"to", c.to}, {"value", c.value}, {"mw_basis", c.mw_basis}});
  j["gamma"] = Json::array();
  for (Index k = 0; k < net.num_injectors(); ++k)
    j["gamma"].push_back({{"injector", k},
                          {"bus", net.injectors()[static_cast<size_t>(k)].bus},
                          {"lower", sol.gamma(2 * k)},
                          {"upper", sol.gamma(2 * k + 1)}});
  j["p"] = number_list(sol.p);
  j["theta"] = number_list(sol.theta);
  j["flows"] = number_list(line_flows(net, sol.theta));
  j["marginal"] = Json::array();
  for (Index k : sol.marginal) j["marginal"].push_back(net.injectors()[static_cast<size_t>(k)].bus);
  j["degenerate"] = sol.degenerate;
  j["reference_bus"] = sol.reference_bus;
  return j;
}

Json to_json(const EquivalentCircuit& c) {
  Json j;
  j["nodes"] = Json::array();
  for (Index i = 0; i < c.num_nodes(); ++i) j["nodes"].push_back(i);
  j["ground"] = c.ground();
  j["offset"] = c.offset();
  j["radial"] = c.radial();
  j["resistors"] = Json::array();
  for (const Resistor& r : c.resistors()) j["resistors"].push_back({{"from", r.from}, {"to", r.to}, {"ohms", r.ohms}});
  j["current_sources"] = Json::array();
  for (const CurrentSource& s : c.sources())
    j["current_sources"].push_back({{"from", s.from}, {"to", s.to}, {"amps", s.amps}});
  j["voltage_source_view"] = Json::array();
  for (const VoltageSource& v : to_voltage_sources(c).sources)
    j["voltage_source_view"].push_back({{"from", v.from}, {"to", v.to}, {"volts", v.volts}});
  return j;
}

Json to_json(const CheckReport& r) {
  Json j;
  j["tolerance"] = r.tolerance;
  j["residuals"] = Json::array();
  for (const ResidualBlock& b : r.blocks) j["residuals"].push_back({{"name", b.name}, {"norm", b.norm}, {"pass", b.pass}});
  j["duality_gap"] = {{"value", r.duality_gap}, {"pass", r.gap_pass}};
  j["pass"] = r.all_pass();
  return j;
}

Json to_json(const RecoveredPrices& r) {
  Json j;
  if (r.lmp) j["lmp"] = number_map(*r.lmp);
  j["differences"] = Json::array();
  for (Index i = 0; i < r.differences.rows(); ++i) j["differences"].push_back(number_list(r.differences.row(i).transpose()));
  return j;
}

Json to_json(const NegativePriceReport& r) {
  Json j;
  j["negative_prices"] = r.negative;
  j["witnesses"] = Json::array();
  for (size_t k = 0; k < r.witnesses.size(); ++k)
    j["witnesses"].push_back({{"bus", r.witnesses[k]}, {"lmp", r.witness_prices[k]}});
  j["min_price"] = {{"bus", r.min_node}, {"lmp", r.min_price}};
  j["ground_is_minimum"] = r.ground_is_minimum;
  j["negative_voltages"] = r.negative_voltages;
  return j;
}

Json to_json(const EquivalentCircuit& c, const CongestionImpact& impact) {
  Json j;
  j["ground"] = c.ground();
  j["offset"] = c.offset();
  j["total"] = number_list(impact.total);
  j["sources"] = Json::array();
  for (const SourceImpact& s : impact.sources) {
    const CurrentSource& src = c.sources()[static_cast<size_t>(s.source)];
    Json neg = Json::array();
    for (Index b : s.negative_nodes) neg.push_back(b);
    j["sources"].push_back({{"from", src.from},
                            {"to", src.to},
                            {"amps", src.amps},
                            {"contribution", number_list(s.contribution)},
                            {"min", s.min},
                            {"max", s.max},
                            {"negative_buses", neg}});
  }
  return j;
}

std::string netlist(const EquivalentCircuit& c, bool voltage_sources) {
  std::ostringstream os;
  os << "* ground: node " << bus_label(c.ground()) << ", offset " << format_number(c.offset()) << "\n";
  std::vector<bool> in_series(c.resistors().size(), false);
  if (voltage_sources) {
    const auto view = to_voltage_sources(c);
    for (size_t k = 0; k < view.sources.size(); ++k) in_series[static_cast<size_t>(view.sources[k].resistor)] = true;
    for (size_t k = 0; k < c.resistors().size(); ++k) {
      if (in_series[k]) continue;
      const Resistor& r = c.resistors()[k];
      os << 'R' << k + 1 << ' ' << bus_label(r.from) << ' ' << bus_label(r.to) << ' ' << format_number(r.ohms) << "\n";
    }
    for (size_t k = 0; k < view.sources.size(); ++k) {
      const VoltageSource& v = view.sources[k];
      const std::string internal = "x" + std::to_string(k + 1);
      os << 'V' << k + 1 << ' ' << bus_label(v.to) << ' ' << internal << ' ' << format_number(v.volts) << "\n";
      os << 'R' << v.resistor + 1 << ' ' << internal << ' ' << bus_label(v.from) << ' ' << format_number(v.ohms)
         << "\n";
    }
  } else {
    for (size_t k = 0; k < c.resistors().size(); ++k) {
      const Resistor& r = c.resistors()[k];
      os << 'R' << k + 1 << ' ' << bus_label(r.from) << ' ' << bus_label(r.to) << ' ' << format_number(r.ohms) << "\n";
    }
    for (size_t k = 0; k < c.sources().size(); ++k) {
      const CurrentSource& s = c.sources()[k];
      os << 'I' << k + 1 << ' ' << bus_label(s.from) << ' ' << bus_label(s.to) << ' ' << format_number(s.amps) << "\n";
    }
  }
  return os.str();
}

std::string dump(const Json& j) {
  Json copy = j;
  round_floats(copy);
  return copy.dump(2) + "\n";
}

}  // namespace lmpc
