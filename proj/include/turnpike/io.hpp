#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "turnpike/analysis.hpp"
#include "turnpike/optimize.hpp"
#include "turnpike/spiral.hpp"
#include "turnpike/types.hpp"

namespace turnpike {

namespace detail {

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

inline double parse_double(const std::string& tok, const std::string& where) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw std::runtime_error(where + ": not a number: '" + tok + "'");
  }
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dataset CSV: header x1,..,xd,label,anchor1,..,anchord, one sample per row.
// ---------------------------------------------------------------------------

inline void write_dataset_csv(const Dataset& data, std::ostream& os) {
  data.validate();
  for (int j = 1; j <= data.dim; ++j) os << "x" << j << ",";
  os << "label";
  for (int j = 1; j <= data.dim; ++j) os << ",anchor" << j;
  os << "\n";
  for (const Sample& s : data.samples) {
    for (int j = 0; j < data.dim; ++j) os << detail::format_double(s.x[static_cast<std::size_t>(j)]) << ",";
    os << s.label;
    for (int j = 0; j < data.dim; ++j) os << "," << detail::format_double(s.anchor[static_cast<std::size_t>(j)]);
    os << "\n";
  }
}

inline Dataset read_dataset_csv(std::istream& is, const std::string& name = "dataset") {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(name + ":1: missing header");
  const std::vector<std::string> header = detail::split_csv_line(line);
  int dim = 0;
  while (dim < static_cast<int>(header.size()) &&
         header[static_cast<std::size_t>(dim)] == "x" + std::to_string(dim + 1)) {
    ++dim;
  }
  if (dim == 0 || static_cast<int>(header.size()) != 2 * dim + 1 ||
      header[static_cast<std::size_t>(dim)] != "label") {
    throw std::runtime_error(name + ":1: malformed header '" + line + "'");
  }
  for (int j = 0; j < dim; ++j) {
    if (header[static_cast<std::size_t>(dim + 1 + j)] != "anchor" + std::to_string(j + 1)) {
      throw std::runtime_error(name + ":1: malformed header '" + line + "'");
    }
  }

  Dataset data;
  data.dim = dim;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> tok = detail::split_csv_line(line);
    const std::string where = name + ":" + std::to_string(lineno);
    if (static_cast<int>(tok.size()) != 2 * dim + 1) {
      throw std::runtime_error(where + ": expected " + std::to_string(2 * dim + 1) + " fields, got " +
                               std::to_string(tok.size()));
    }
    Sample s;
    for (int j = 0; j < dim; ++j) s.x.push_back(detail::parse_double(tok[static_cast<std::size_t>(j)], where));
    s.label = static_cast<int>(detail::parse_double(tok[static_cast<std::size_t>(dim)], where));
    for (int j = 0; j < dim; ++j) {
      s.anchor.push_back(detail::parse_double(tok[static_cast<std::size_t>(dim + 1 + j)], where));
    }
    data.samples.push_back(std::move(s));
  }
  data.validate();
  return data;
}

// ---------------------------------------------------------------------------
// Model JSON
// ---------------------------------------------------------------------------

inline nlohmann::json norm_order_to_json(NormOrder p) {
  if (p.is_infinite()) return "inf";
  return p.value();
}

inline NormOrder norm_order_from_json(const nlohmann::json& j, const std::string& field) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return NormOrder::infinity();
    throw std::runtime_error("field '" + field + "': expected a number or \"inf\"");
  }
  return NormOrder::p(j.get<double>());
}

inline nlohmann::json stage_cost_params_to_json(const StageCostParams& pi) {
  return nlohmann::json{{"s_x", pi.s_x}, {"s_u", pi.s_u},
                        {"p_x", norm_order_to_json(pi.p_x)}, {"p_u", norm_order_to_json(pi.p_u)},
                        {"q", pi.q},     {"r", pi.r}};
}

inline StageCostParams stage_cost_params_from_json(const nlohmann::json& j) {
  StageCostParams pi;
  pi.s_x = j.at("s_x").get<double>();
  pi.s_u = j.at("s_u").get<double>();
  pi.p_x = norm_order_from_json(j.at("p_x"), "p_x");
  pi.p_u = norm_order_from_json(j.at("p_u"), "p_u");
  pi.q = j.at("q").get<double>();
  pi.r = j.at("r").get<double>();
  pi.validate();
  return pi;
}

/// Everything a trained-model file carries: the weights, the configuration
/// that produced them (gamma resolved), and headline results.
struct ModelFile {
  static constexpr int kFormatVersion = 1;

  NetworkWeights weights;
  ActivationKind activation = ActivationKind::Tanh;
  StageCostParams pi;
  double gamma = 0.0;
  double input_rescale = 100.0;
  std::uint64_t seed = 1;
  std::string step_rule = "adam";
  double step_size = 1.0;
  int max_iters = 0;
  double init_scale = 0.1;
  double tol_grad = 1e-6;
  double objective = 0.0;
  double terminal_loss = 0.0;
  bool converged = false;
  int iterations = 0;
};

inline nlohmann::json model_to_json(const ModelFile& m) {
  nlohmann::json layers = nlohmann::json::array();
  for (const WeightLayer& l : m.weights.layers) {
    layers.push_back(nlohmann::json{{"A", l.A}, {"b", l.b}});
  }
  return nlohmann::json{
      {"format_version", ModelFile::kFormatVersion},
      {"dim", m.weights.dim},
      {"depth", m.weights.depth()},
      {"activation", to_string(m.activation)},
      {"layers", layers},  // A column-major
      {"training",
       {{"pi", stage_cost_params_to_json(m.pi)},
        {"gamma", m.gamma},
        {"input_rescale", m.input_rescale},
        {"seed", m.seed},
        {"step_rule", m.step_rule},
        {"step_size", m.step_size},
        {"max_iters", m.max_iters},
        {"init_scale", m.init_scale},
        {"tol_grad", m.tol_grad}}},
      {"objective", m.objective},
      {"terminal_loss", m.terminal_loss},
      {"converged", m.converged},
      {"iterations", m.iterations}};
}

inline ModelFile model_from_json(const nlohmann::json& j) {
  ModelFile m;
  try {
    const int version = j.at("format_version").get<int>();
    if (version != ModelFile::kFormatVersion) {
      throw std::runtime_error("unsupported format_version " + std::to_string(version));
    }
    m.weights.dim = j.at("dim").get<int>();
    m.activation = activation_from_string(j.at("activation").get<std::string>());
    for (const nlohmann::json& jl : j.at("layers")) {
      WeightLayer l;
      l.A = jl.at("A").get<std::vector<double>>();
      l.b = jl.at("b").get<std::vector<double>>();
      m.weights.layers.push_back(std::move(l));
    }
    if (j.at("depth").get<int>() != m.weights.depth()) {
      throw std::runtime_error("field 'depth' disagrees with the number of layers");
    }
    const nlohmann::json& t = j.at("training");
    m.pi = stage_cost_params_from_json(t.at("pi"));
    m.gamma = t.at("gamma").get<double>();
    m.input_rescale = t.at("input_rescale").get<double>();
    m.seed = t.at("seed").get<std::uint64_t>();
    m.step_rule = t.at("step_rule").get<std::string>();
    m.step_size = t.at("step_size").get<double>();
    m.max_iters = t.at("max_iters").get<int>();
    m.init_scale = t.at("init_scale").get<double>();
    m.tol_grad = t.at("tol_grad").get<double>();
    m.objective = j.at("objective").get<double>();
    m.terminal_loss = j.at("terminal_loss").get<double>();
    m.converged = j.at("converged").get<bool>();
    m.iterations = j.at("iterations").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("model: ") + e.what());
  }
  m.weights.validate();
  return m;
}

/// Parses JSON text, reporting failures with line and column.
inline nlohmann::json parse_json_text(const std::string& text, const std::string& name) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    if (offset > text.size()) offset = text.size();
    int line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw std::runtime_error(name + ":" + std::to_string(line) + ":" + std::to_string(col) +
                             ": " + e.what());
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

inline void save_model(const ModelFile& m, const std::string& path) {
  write_text_file(path, model_to_json(m).dump(2) + "\n");
}

inline ModelFile load_model(const std::string& path) {
  return model_from_json(parse_json_text(read_text_file(path), path));
}

// ---------------------------------------------------------------------------
// Analysis report JSON
// ---------------------------------------------------------------------------

struct AnalysisReport {
  double epsilon = 1.0;
  double delta = 1.0;
  int depth = 0;
  int samples = 0;
  BetaRhoFit fit;
  double n_hat_formula = 0.0;  // from (beta, rho)
  double n_hat_2 = 0.0;        // cost bound, training parametrization
  double n_hat_inf = 0.0;      // cost bound, max-norm parametrization
  int q_eps_count = 0;
  int q_eps_complement = 0;
  double terminal_loss = 0.0;
  double empirical_risk = 0.0;
  DissipationCheck dissipation;
};

inline nlohmann::json report_to_json(const AnalysisReport& r) {
  return nlohmann::json{
      {"format_version", 1},
      {"epsilon", r.epsilon},
      {"delta", r.delta},
      {"depth", r.depth},
      {"samples", r.samples},
      {"beta", r.fit.beta},
      {"rho", r.fit.rho},
      {"v_hat", r.fit.v_hat},
      {"n_hat_2_beta_rho", r.n_hat_formula},
      {"n_hat_2", r.n_hat_2},
      {"n_hat_inf", r.n_hat_inf},
      {"q_eps_count", r.q_eps_count},
      {"q_eps_complement", r.q_eps_complement},
      {"terminal_loss", r.terminal_loss},
      {"empirical_risk", r.empirical_risk},
      {"dissipation",
       {{"holds", r.dissipation.holds},
        {"min_slack", r.dissipation.min_slack},
        {"turnpike_lhs", r.dissipation.turnpike_lhs},
        {"turnpike_rhs", r.dissipation.turnpike_rhs}}}};
}

// ---------------------------------------------------------------------------
// Decision grid: CSV rows x,y,label (0 = reject) and an optional SVG scatter.
// ---------------------------------------------------------------------------

inline void write_grid_csv(const DecisionGrid& grid, std::ostream& os) {
  os << "x,y,label\n";
  for (int iy = 0; iy < grid.resolution; ++iy) {
    for (int ix = 0; ix < grid.resolution; ++ix) {
      os << detail::format_double(grid.coord(ix)) << "," << detail::format_double(grid.coord(iy))
         << "," << grid.labels[static_cast<std::size_t>(iy) * grid.resolution + ix] << "\n";
    }
  }
}

inline void write_grid_svg(const DecisionGrid& grid, std::ostream& os, int cell_px = 4) {
  const int size = grid.resolution * cell_px;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
     << "\">\n";
  for (int iy = 0; iy < grid.resolution; ++iy) {
    for (int ix = 0; ix < grid.resolution; ++ix) {
      const int label = grid.labels[static_cast<std::size_t>(iy) * grid.resolution + ix];
      const char* color = label == 1 ? "#d62728" : (label == 2 ? "#2b2b2b" : "#d9d9d9");
      // SVG y grows downward; flip so larger y is on top.
      os << "<rect x=\"" << ix * cell_px << "\" y=\"" << (grid.resolution - 1 - iy) * cell_px
         << "\" width=\"" << cell_px << "\" height=\"" << cell_px << "\" fill=\"" << color
         << "\"/>\n";
    }
  }
  os << "</svg>\n";
}

}  // namespace turnpike
