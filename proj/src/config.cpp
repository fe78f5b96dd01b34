#include "netlqr/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "netlqr/errors.hpp"

namespace netlqr {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_real(std::string_view s, const std::string& what) {
  s = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ConfigError(what + ": expected a finite number, got '" + std::string(s) + "'");
  return v;
}

int to_int(std::string_view s, const std::string& what) {
  s = trim(s);
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError(what + ": expected an integer, got '" + std::string(s) + "'");
  return v;
}

std::vector<int> to_zero_based(const std::vector<int>& ids, int n, const char* what) {
  std::vector<int> out;
  for (int id : ids) {
    if (id < 1 || id > n)
      throw ConfigError(std::string(what) + ": node " + std::to_string(id) + " out of range 1.." +
                        std::to_string(n));
    out.push_back(id - 1);
  }
  return out;
}

std::filesystem::path resolve(const ModelConfig& cfg, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !cfg.base_dir.empty()) path = cfg.base_dir / path;
  return path;
}

}  // namespace

std::pair<int, int> parse_kappa_range(std::string_view s) {
  s = trim(s);
  const std::size_t pos = s.find("..");
  int a = 0, b = 0;
  if (pos == std::string_view::npos) {
    a = b = to_int(s, "kappa");
  } else {
    a = to_int(s.substr(0, pos), "kappa");
    b = to_int(s.substr(pos + 2), "kappa");
  }
  if (a < 0 || b < a) throw ConfigError("kappa: expected 0 <= a <= b in 'a..b'");
  return {a, b};
}

std::vector<double> parse_real_list(std::string_view s) {
  std::vector<double> out;
  for (auto part : split(s, ',')) out.push_back(to_real(part, "list"));
  return out;
}

std::vector<int> parse_int_list(std::string_view s) {
  std::vector<int> out;
  if (trim(s).empty()) return out;
  for (auto part : split(s, ',')) out.push_back(to_int(part, "list"));
  return out;
}

std::vector<std::vector<int>> parse_partition(std::string_view s) {
  std::vector<std::vector<int>> out;
  for (auto block : split(s, ';')) {
    if (block.empty()) throw ConfigError("partition: empty block");
    out.push_back(parse_int_list(block));
  }
  return out;
}

ModelConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  ModelConfig cfg;
  cfg.base_dir = base_dir;
  std::set<std::string> seen;
  int lineno = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line(raw);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    const std::string where = "line " + std::to_string(lineno);
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view val = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key '" + key + "'");
    const std::string what = where + " (" + key + ")";
    try {
      if (key == "model") {
        cfg.model = std::string(val);
        if (cfg.model != "hvac" && cfg.model != "power" && cfg.model != "custom")
          throw ConfigError(what + ": model must be hvac, power or custom");
      } else if (key == "rows") cfg.rows = to_int(val, what);
      else if (key == "cols") cfg.cols = to_int(val, what);
      else if (key == "dt") cfg.dt = to_real(val, what);
      else if (key == "k") cfg.k = to_real(val, what);
      else if (key == "eta1") cfg.eta1 = to_real(val, what);
      else if (key == "eta2") cfg.eta2 = to_real(val, what);
      else if (key == "eta3") cfg.eta3 = to_real(val, what);
      else if (key == "edge_list") cfg.edge_list = std::string(val);
      else if (key == "nodes") cfg.nodes = to_int(val, what);
      else if (key == "v_ref") cfg.v_ref = to_real(val, what);
      else if (key == "inertia") cfg.inertia = to_real(val, what);
      else if (key == "controlled") cfg.controlled = parse_int_list(val);
      else if (key == "observed") cfg.observed = parse_int_list(val);
      else if (key == "block_file") cfg.block_file = std::string(val);
      else if (key == "partition") cfg.partition = parse_partition(val);
      else if (key == "eta") cfg.eta = parse_real_list(val);
      else if (key == "kappa") cfg.kappa = parse_kappa_range(val);
      else if (key == "horizon") cfg.horizon = to_int(val, what);
      else if (key == "alpha0") cfg.alpha0 = to_real(val, what);
      else throw ConfigError(what + ": unknown key");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      if (msg.rfind("line ", 0) == 0) throw;
      throw ConfigError(what + ": " + msg);
    }
  }
  if (cfg.rows < 1 || cfg.cols < 1) throw ConfigError("rows and cols must be positive");
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(cfg.inertia > 0.0)) throw ConfigError("inertia must be positive");
  if (!(cfg.alpha0 > 0.0 && cfg.alpha0 < 1.0)) throw ConfigError("alpha0 must be in (0,1)");
  if (cfg.horizon && *cfg.horizon < 1) throw ConfigError("horizon must be at least 1");
  for (double e : cfg.eta)
    if (e == 0.0) throw ConfigError("eta values must be nonzero");
  if (cfg.model == "power" && cfg.edge_list.empty()) throw ConfigError("power model needs edge_list");
  if (cfg.model == "custom" && cfg.block_file.empty()) throw ConfigError("custom model needs block_file");
  return cfg;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ModelConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text_file(path), path.parent_path());
}

ModelConfig with_eta(const ModelConfig& cfg, double eta) {
  ModelConfig c = cfg;
  c.eta1 = c.eta2 = eta;
  return c;
}

NetworkedSystem build_system(const ModelConfig& cfg) {
  if (cfg.model == "custom") return parse_block_file(read_text_file(resolve(cfg, cfg.block_file)));
  if (cfg.model == "hvac") {
    if (!cfg.edge_list.empty()) {
      EdgeList el = parse_edge_list(read_text_file(resolve(cfg, cfg.edge_list)), cfg.nodes);
      for (auto& [e, w] : el.weights) w *= cfg.k;
      if (cfg.controlled) throw ConfigError("controlled is only supported on the hvac mesh");
      return build_hvac_network(el.graph, el.weights, cfg.dt, cfg.eta1, cfg.eta2, cfg.eta3);
    }
    if (cfg.controlled) {
      const auto ids = to_zero_based(*cfg.controlled, cfg.rows * cfg.cols, "controlled");
      return build_hvac_underactuated(cfg.rows, cfg.cols, cfg.dt, cfg.k, cfg.eta1, cfg.eta2,
                                      cfg.eta3, ids);
    }
    return build_hvac(cfg.rows, cfg.cols, cfg.dt, cfg.k, cfg.eta1, cfg.eta2, cfg.eta3);
  }
  EdgeList el = parse_edge_list(read_text_file(resolve(cfg, cfg.edge_list)), cfg.nodes);
  const double scale = cfg.v_ref / (cfg.inertia * cfg.inertia);
  for (auto& [e, w] : el.weights) w *= scale;
  if (cfg.observed) {
    const auto ids = to_zero_based(*cfg.observed, el.graph.num_nodes, "observed");
    return build_power_undersensed(el.graph, el.weights, cfg.dt, cfg.eta1, cfg.eta2, cfg.eta3, ids);
  }
  return build_power(el.graph, el.weights, cfg.dt, cfg.eta1, cfg.eta2, cfg.eta3);
}

NetworkedSystem parse_block_file(std::string_view text) {
  int n = -1;
  std::vector<int> sdims, udims;
  std::vector<std::pair<int, int>> edges;
  struct Pending {
    char which;
    int i, j;
    Matrix m;
  };
  std::vector<Pending> blocks;
  int lineno = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  auto node = [&](std::string_view s, const std::string& where) {
    const int id = to_int(s, where);
    if (n < 0) throw ConfigError(where + ": 'nodes' must come first");
    if (id < 1 || id > n) throw ConfigError(where + ": node id out of range");
    return id - 1;
  };
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line(raw);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "block file line " + std::to_string(lineno);
    std::string head, rest;
    {
      std::istringstream ls{std::string(line)};
      ls >> head;
      std::getline(ls, rest);
    }
    if (head == "nodes") {
      if (n >= 0) throw ConfigError(where + ": duplicate 'nodes'");
      n = to_int(rest, where);
      if (n < 1) throw ConfigError(where + ": node count must be positive");
      sdims.assign(n, 1);
      udims.assign(n, 1);
    } else if (head == "dims") {
      std::istringstream ls(rest);
      std::string a, b, c, extra;
      if (!(ls >> a >> b >> c) || (ls >> extra)) throw ConfigError(where + ": expected 'dims i nx nu'");
      const int i = node(a, where);
      sdims[i] = to_int(b, where);
      udims[i] = to_int(c, where);
    } else if (head == "edge") {
      std::istringstream ls(rest);
      std::string a, b, extra;
      if (!(ls >> a >> b) || (ls >> extra)) throw ConfigError(where + ": expected 'edge i j'");
      edges.emplace_back(node(a, where), node(b, where));
    } else if (head == "A" || head == "B" || head == "Q" || head == "R") {
      const std::size_t eq = rest.find('=');
      if (eq == std::string::npos) throw ConfigError(where + ": expected '" + head + " i j = rows'");
      std::istringstream ls(rest.substr(0, eq));
      std::string a, b, extra;
      if (!(ls >> a >> b) || (ls >> extra)) throw ConfigError(where + ": expected two node ids");
      std::vector<std::vector<double>> rows;
      for (auto r : split(std::string_view(rest).substr(eq + 1), ';')) {
        std::vector<double> vals;
        std::istringstream rs{std::string(r)};
        std::string tok;
        while (rs >> tok) vals.push_back(to_real(tok, where));
        if (vals.empty()) throw ConfigError(where + ": empty matrix row");
        if (!rows.empty() && vals.size() != rows.front().size())
          throw ConfigError(where + ": ragged matrix rows");
        rows.push_back(std::move(vals));
      }
      Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
      for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
          m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      blocks.push_back({head[0], node(a, where), node(b, where), std::move(m)});
    } else {
      throw ConfigError(where + ": unknown directive '" + head + "'");
    }
  }
  if (n < 0) throw ConfigError("block file: missing 'nodes'");
  NetworkedSystem sys;
  try {
    sys = make_system(build_graph(n, edges), sdims, udims);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("block file: ") + e.what());
  }
  for (auto& b : blocks) {
    switch (b.which) {
      case 'A': sys.A[{b.i, b.j}] = b.m; break;
      case 'B': sys.B[{b.i, b.j}] = b.m; break;
      case 'Q': sys.set_Q(b.i, b.j, b.m); break;
      default: sys.set_R(b.i, b.j, b.m); break;
    }
  }
  try {
    assemble_dense(sys);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("block file: ") + e.what());
  }
  return sys;
}

namespace {

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + std::to_string(v[i]);
  return out;
}

}  // namespace

std::string write_config(const ModelConfig& cfg) {
  std::ostringstream os;
  auto line = [&](const char* key, const std::string& val) { os << key << " = " << val << '\n'; };
  line("model", cfg.model);
  line("rows", std::to_string(cfg.rows));
  line("cols", std::to_string(cfg.cols));
  line("dt", format_real(cfg.dt));
  line("k", format_real(cfg.k));
  line("eta1", format_real(cfg.eta1));
  line("eta2", format_real(cfg.eta2));
  line("eta3", format_real(cfg.eta3));
  if (!cfg.edge_list.empty()) line("edge_list", cfg.edge_list);
  line("nodes", std::to_string(cfg.nodes));
  line("v_ref", format_real(cfg.v_ref));
  line("inertia", format_real(cfg.inertia));
  if (cfg.controlled) line("controlled", join_ints(*cfg.controlled));
  if (cfg.observed) line("observed", join_ints(*cfg.observed));
  if (!cfg.block_file.empty()) line("block_file", cfg.block_file);
  if (cfg.partition) {
    std::string p;
    for (std::size_t b = 0; b < cfg.partition->size(); ++b) p += (b ? "; " : "") + join_ints((*cfg.partition)[b]);
    line("partition", p);
  }
  if (!cfg.eta.empty()) {
    std::string e;
    for (std::size_t i = 0; i < cfg.eta.size(); ++i) e += (i ? ", " : "") + format_real(cfg.eta[i]);
    line("eta", e);
  }
  if (cfg.kappa) line("kappa", std::to_string(cfg.kappa->first) + ".." + std::to_string(cfg.kappa->second));
  if (cfg.horizon) line("horizon", std::to_string(*cfg.horizon));
  line("alpha0", format_real(cfg.alpha0));
  return os.str();
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t model_hash(const NetworkedSystem& sys) {
  const DenseSystem d = assemble_dense(sys);
  std::uint64_t h = 1469598103934665603ull;
  auto feed = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  for (const Matrix* m : {&d.A, &d.B, &d.Q, &d.R}) {
    feed(std::to_string(m->rows()) + "x" + std::to_string(m->cols()) + ";");
    for (Eigen::Index r = 0; r < m->rows(); ++r)
      for (Eigen::Index c = 0; c < m->cols(); ++c) {
        feed(format_real((*m)(r, c)));
        feed(",");
      }
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace netlqr
