#include "decolab/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace decolab {

namespace fs = std::filesystem;

Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

void write_json_file(const fs::path& path, const Json& doc) { write_text_file(path, doc.dump(2) + "\n"); }

std::string format_number(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\r\n";
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw Error("write_csv: row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << "\r\n";
  }
  write_text_file(path, os.str());
}

void write_trajectory_csv(const fs::path& path, const TrajectoryRecord& r) {
  std::vector<std::vector<double>> rows;
  rows.reserve(r.size());
  for (std::size_t k = 0; k < r.size(); ++k)
    rows.push_back({r.t[k], r.mean_x[k], r.mean_p[k], r.var_x[k], r.var_p[k], r.jumped[k] ? 1.0 : 0.0});
  write_csv(path, {"t", "mean_x", "mean_p", "var_x", "var_p", "jumped"}, rows);
}

TrajectoryRecord read_trajectory_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,mean_x,mean_p,var_x,var_p,jumped") throw Error("'" + path.string() + "' is not a trajectory CSV");
  TrajectoryRecord r;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    double v[6];
    std::size_t pos = 0;
    for (int c = 0; c < 6; ++c) {
      std::size_t end = line.find(',', pos);
      std::string cell = line.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v[c]);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || (c < 5 && end == std::string::npos))
        throw Error("'" + path.string() + "' line " + std::to_string(lineno) + ": malformed row");
      pos = end + 1;
    }
    r.push(v[0], v[1], v[2], v[3], v[4], v[5] != 0.0);
  }
  return r;
}

void write_wavefunction_csv(const fs::path& path, const WaveFunction& psi) {
  const ComplexVector a = psi.physical_amplitudes();
  std::vector<std::vector<double>> rows;
  for (std::size_t j = 0; j < psi.grid().n_points; ++j) {
    const cplx c = a[static_cast<Eigen::Index>(j)];
    rows.push_back({psi.grid().x(j), c.real(), c.imag(), std::norm(c)});
  }
  write_csv(path, {"x", "re", "im", "prob"}, rows);
}

void write_collapse_path_csv(const fs::path& path, const CollapsePath& p) {
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < p.t.size(); ++k) rows.push_back({p.t[k], p.w1[k], p.jumped[k] ? 1.0 : 0.0});
  write_csv(path, {"t", "w1", "jumped"}, rows);
}

void check_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(where + ": expected a JSON object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) throw Error(where + ": unknown key '" + item.key() + "'");
  }
}

namespace {

cplx complex_from_json(const Json& j, const std::string& what) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw Error(what + ": complex entries must be numbers or [re, im] pairs");
}

Json complex_to_json(cplx c) { return Json::array({c.real(), c.imag()}); }

}  // namespace

ComplexVector vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw Error(what + ": expected a nonempty array");
  ComplexVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = complex_from_json(j[i], what);
  return v;
}

ComplexMatrix matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw Error(what + ": expected an array of rows");
  const std::size_t cols = j[0].size();
  ComplexMatrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw Error(what + ": rows have unequal length");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = complex_from_json(j[r][c], what);
  }
  return m;
}

Json to_json(const ComplexVector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v[i]));
  return out;
}

Json to_json(const ComplexMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    out.push_back(row);
  }
  return out;
}

LindbladModel model_from_json(const Json& j) {
  check_keys(j, {"H", "F", "r"}, "model");
  if (!j.contains("H") || !j.contains("F") || !j.contains("r")) throw Error("model: needs H, F and r");
  LindbladModel m;
  m.H = matrix_from_json(j["H"], "model.H");
  if (!j["F"].is_array()) throw Error("model.F: expected an array of matrices");
  for (std::size_t k = 0; k < j["F"].size(); ++k) m.F.push_back(matrix_from_json(j["F"][k], "model.F"));
  m.r = matrix_from_json(j["r"], "model.r");
  m.validate();
  return m;
}

Json to_json(const LindbladModel& model) {
  Json f = Json::array();
  for (const auto& op : model.F) f.push_back(to_json(op));
  return Json{{"H", to_json(model.H)}, {"F", f}, {"r", to_json(model.r)}};
}

EventScript script_from_json(const Json& j) {
  check_keys(j, {"subsystems", "initial", "events"}, "script");
  if (!j.contains("subsystems") || !j["subsystems"].is_array()) throw Error("script: needs a subsystems array");
  std::vector<Subsystem> parts;
  for (const auto& s : j["subsystems"]) {
    check_keys(s, {"name", "dim"}, "script.subsystems");
    parts.push_back({s.at("name").get<std::string>(), s.at("dim").get<std::size_t>()});
  }
  SubsystemLayout layout(parts);
  EventScript script;
  if (!j.contains("initial")) throw Error("script: needs an initial state");
  const Json& init = j["initial"];
  check_keys(init, {"amplitudes", "product"}, "script.initial");
  if (init.contains("amplitudes") == init.contains("product"))
    throw Error("script.initial: give exactly one of amplitudes or product");
  if (init.contains("amplitudes")) {
    script.initial = TensorState{layout, vector_from_json(init["amplitudes"], "script.initial.amplitudes")};
  } else {
    std::vector<ComplexVector> factors;
    for (const auto& f : init["product"]) factors.push_back(vector_from_json(f, "script.initial.product"));
    script.initial = TensorState::product(layout, factors);
  }
  if (j.contains("events")) {
    for (const auto& e : j["events"]) {
      check_keys(e, {"label", "targets", "frame", "unitary"}, "script.events");
      Event ev;
      ev.label = e.value("label", "event " + std::to_string(script.events.size() + 1));
      ev.targets = e.at("targets").get<std::vector<std::string>>();
      if (e.contains("frame")) ev.frame = e["frame"].get<std::vector<std::string>>();
      const Json& u = e.at("unitary");
      if (u.is_object()) {
        check_keys(u, {"measure"}, "script.events.unitary");
        const Json& m = u.at("measure");
        check_keys(m, {"plus", "minus", "record"}, "script.events.unitary.measure");
        ev.unitary = measurement_unitary(vector_from_json(m.at("plus"), "measure.plus"),
                                         vector_from_json(m.at("minus"), "measure.minus"), m.value("record", false));
      } else {
        ev.unitary = matrix_from_json(u, "script.events.unitary");
      }
      script.events.push_back(std::move(ev));
    }
  }
  script.validate();
  return script;
}

namespace {

Json node_to_json(const BranchNode& n) {
  Json children = Json::array();
  for (const auto& c : n.children) children.push_back(node_to_json(c));
  return Json{{"label", n.label}, {"coeff", n.coeff}, {"prob", n.prob}, {"frame", n.frame},
              {"state", to_json(n.state_s)}, {"children", children}};
}

}  // namespace

Json to_json(const BranchTree& tree) {
  return Json{{"frame", tree.frame}, {"depth", tree.depth}, {"root", node_to_json(tree.root)}};
}

Json to_json(const ConsistencyReport& c) {
  return Json{{"consistent", c.consistent},         {"joint_decoherent", c.joint_decoherent},
              {"aligned", c.aligned},               {"marginal_defect", c.marginal_defect},
              {"joint_violation", c.joint_violation}, {"diagnostic", c.diagnostic}};
}

Json to_json(const Assertion& a) {
  return Json{{"name", a.name}, {"expected", a.expected}, {"actual", a.actual}, {"tolerance", a.tolerance},
              {"pass", a.pass}, {"relation", a.lower_bound ? "at_least" : "within"}};
}

Json to_json(const ScenarioReport& r) {
  Json frames = Json::array();
  for (const auto& f : r.frames)
    frames.push_back(Json{{"name", f.name},
                          {"decoherent", f.decoherence.decoherent},
                          {"max_violation", f.decoherence.max_violation},
                          {"leaf_probability_sum", f.tree.leaf_probability_sum()},
                          {"tree", to_json(f.tree)}});
  Json consistency = Json::object();
  for (const auto& [k, c] : r.consistency) consistency[k] = to_json(c);
  Json assertions = Json::array();
  for (const auto& a : r.assertions) assertions.push_back(to_json(a));
  Json values = Json::object();
  for (const auto& [k, v] : r.values) values[k] = v;
  Json params = Json::object();
  for (const auto& [k, v] : r.parameters) params[k] = v;
  return Json{{"scenario", r.scenario}, {"parameters", params}, {"passed", r.passed()},  {"values", values},
              {"consistency", consistency}, {"assertions", assertions}, {"frames", frames}};
}

}  // namespace decolab
