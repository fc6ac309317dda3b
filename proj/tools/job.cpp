#include "job.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace pdcrys::job {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------- parsing

struct Node {
  const json& j;
  std::string ptr;

  Node at(const std::string& key) const { return {j.at(key), ptr + "/" + key}; }
  Node at(size_t i) const { return {j.at(i), ptr + "/" + std::to_string(i)}; }
  bool has(const std::string& key) const { return j.contains(key); }
  [[noreturn]] void fail(const std::string& msg) const { throw SchemaError(ptr, msg); }
};

Node object(const Node& n, std::initializer_list<const char*> allowed, std::initializer_list<const char*> required = {}) {
  if (!n.j.is_object()) n.fail("expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto& [k, v] : n.j.items())
    if (!ok.count(k)) throw SchemaError(n.ptr + "/" + k, "unknown field");
  for (const char* k : required)
    if (!n.j.contains(k)) n.fail(std::string("missing field \"") + k + "\"");
  return n;
}

void expect_array(const Node& n) {
  if (!n.j.is_array()) n.fail("expected an array");
}

int64_t as_int(const Node& n) {
  if (!n.j.is_number_integer()) n.fail("expected an integer");
  return n.j.get<int64_t>();
}

int as_small(const Node& n, int lo, int hi) {
  int64_t v = as_int(n);
  if (v < lo || v > hi) n.fail("expected an integer in " + std::to_string(lo) + ".." + std::to_string(hi));
  return static_cast<int>(v);
}

std::string as_string(const Node& n) {
  if (!n.j.is_string()) n.fail("expected a string");
  return n.j.get<std::string>();
}

bool as_bool(const Node& n) {
  if (!n.j.is_boolean()) n.fail("expected a boolean");
  return n.j.get<bool>();
}

template <class T, class F>
std::vector<T> list(const Node& n, F&& f) {
  expect_array(n);
  std::vector<T> out;
  for (size_t i = 0; i < n.j.size(); ++i) out.push_back(f(n.at(i)));
  return out;
}

constexpr int kExpLimit = 1 << 20;

Exp parse_exp(const Node& n) {
  return list<int>(n, [](const Node& x) { return as_small(x, -kExpLimit, kExpLimit); });
}

Coef parse_coef(const Node& n) {
  if (n.j.is_number_integer()) return {n.j.get<int64_t>()};
  if (!n.j.is_array() || n.j.empty()) n.fail("expected an integer or a nonempty list of integer coordinates");
  return list<int64_t>(n, as_int);
}

PolySpec parse_poly(const Node& n) {
  return list<Term>(n, [](const Node& t) {
    expect_array(t);
    if (t.j.size() != 2) t.fail("a term is [exponent-vector, coefficient]");
    return Term{parse_exp(t.at(0)), parse_coef(t.at(1))};
  });
}

MatrixSpec parse_matrix(const Node& n) {
  return list<MatrixTerm>(n, [](const Node& t) {
    expect_array(t);
    if (t.j.size() != 4) t.fail("a matrix term is [exponent-vector, row, col, coefficient]");
    return MatrixTerm{parse_exp(t.at(0)), as_small(t.at(1), 0, 1 << 16), as_small(t.at(2), 0, 1 << 16), parse_coef(t.at(3))};
  });
}

std::vector<bool> parse_flags(const Node& n) { return list<bool>(n, as_bool); }

AtlasSpec parse_atlas(const Node& raw) {
  Node n = object(raw, {"preset", "dim", "factors", "charts", "overlaps"});
  AtlasSpec a;
  if (n.has("preset")) a.preset = as_string(n.at("preset"));
  if (n.has("dim")) a.dim = as_small(n.at("dim"), 0, 16);
  if (n.has("factors")) a.factors = list<AtlasSpec>(n.at("factors"), parse_atlas);
  if (n.has("charts"))
    a.charts = list<ChartSpec>(n.at("charts"), [](const Node& raw_c) {
      Node c = object(raw_c, {"name", "dim", "invertible"}, {"dim"});
      ChartSpec s;
      if (c.has("name")) s.name = as_string(c.at("name"));
      s.dim = as_small(c.at("dim"), 1, 16);
      if (c.has("invertible")) s.invertible = parse_flags(c.at("invertible"));
      return s;
    });
  if (n.has("overlaps"))
    a.overlaps = list<OverlapSpec>(n.at("overlaps"), [](const Node& raw_o) {
      Node o = object(raw_o, {"i", "j", "invertible_on_i", "images", "inverse_images"}, {"i", "j", "images"});
      OverlapSpec s;
      s.i = as_small(o.at("i"), 0, 1 << 16);
      s.j = as_small(o.at("j"), 0, 1 << 16);
      if (o.has("invertible_on_i")) s.invertible_on_i = parse_flags(o.at("invertible_on_i"));
      s.images = list<PolySpec>(o.at("images"), parse_poly);
      if (o.has("inverse_images")) s.inverse_images = list<PolySpec>(o.at("inverse_images"), parse_poly);
      return s;
    });

  static const std::set<std::string> presets{"", "affine", "torus", "projective_line", "product"};
  if (!presets.count(a.preset)) n.at("preset").fail("unknown preset \"" + a.preset + "\"");
  const bool explicit_atlas = a.preset.empty();
  if (explicit_atlas && a.charts.empty()) n.fail("an explicit atlas needs \"charts\"");
  if (!explicit_atlas && (!a.charts.empty() || !a.overlaps.empty()))
    n.fail("\"charts\" and \"overlaps\" are only allowed without a preset");
  if ((a.preset == "affine" || a.preset == "torus") && a.dim < 1) n.fail("preset \"" + a.preset + "\" needs \"dim\" >= 1");
  if (a.preset != "affine" && a.preset != "torus" && n.has("dim")) n.at("dim").fail("\"dim\" only applies to affine and torus");
  if (a.preset == "product" && a.factors.size() < 2) n.fail("preset \"product\" needs at least two factors");
  if (a.preset != "product" && !a.factors.empty()) n.at("factors").fail("\"factors\" only applies to product");
  return a;
}

LiftSpec parse_lift(const Node& raw) {
  Node n = object(raw, {"name", "chart", "corrections"}, {"name"});
  LiftSpec l;
  l.name = as_string(n.at("name"));
  if (l.name.empty()) n.at("name").fail("empty lift name");
  if (n.has("chart")) l.chart = as_small(n.at("chart"), 0, 1 << 16);
  if (n.has("corrections")) l.corrections = list<PolySpec>(n.at("corrections"), parse_poly);
  return l;
}

LocalSpec parse_local(const Node& raw) {
  Node n = object(raw, {"connection", "filtration", "frobenius"});
  LocalSpec s;
  if (n.has("connection")) s.connection = list<MatrixSpec>(n.at("connection"), parse_matrix);
  if (n.has("filtration"))
    s.filtration = list<std::vector<std::vector<Coef>>>(n.at("filtration"), [](const Node& m) {
      return list<std::vector<Coef>>(m, [](const Node& row) { return list<Coef>(row, parse_coef); });
    });
  if (n.has("frobenius")) s.frobenius = list<MatrixSpec>(n.at("frobenius"), parse_matrix);
  return s;
}

ModuleSpec parse_module(const Node& raw) {
  Node n = object(raw, {"kind", "rank", "lambda", "charts", "gluing"});
  ModuleSpec m;
  if (n.has("kind")) m.kind = as_string(n.at("kind"));
  if (m.kind != "structure_sheaf" && m.kind != "explicit") n.at("kind").fail("expected \"structure_sheaf\" or \"explicit\"");
  if (n.has("rank")) m.rank = as_small(n.at("rank"), 0, 64);
  if (n.has("lambda")) m.lambda = as_small(n.at("lambda"), 0, 1 << 20);
  if (n.has("charts")) m.charts = list<LocalSpec>(n.at("charts"), parse_local);
  if (n.has("gluing"))
    m.gluing = list<GluingSpec>(n.at("gluing"), [](const Node& raw_g) {
      Node g = object(raw_g, {"i", "j", "matrix"}, {"i", "j", "matrix"});
      return GluingSpec{as_small(g.at("i"), 0, 1 << 16), as_small(g.at("j"), 0, 1 << 16), parse_matrix(g.at("matrix"))};
    });
  if (m.kind == "structure_sheaf") {
    if (m.rank != 1) n.at("rank").fail("the structure sheaf has rank 1");
    if (!m.charts.empty() || !m.gluing.empty()) n.fail("the structure sheaf takes no \"charts\" or \"gluing\"");
  }
  return m;
}

CommandSpec parse_command(const Node& raw) {
  Node n = object(raw, {"name", "lifts", "cap_poly", "cap_pd", "bound", "chart", "seed"}, {"name"});
  CommandSpec c;
  c.name = as_string(n.at("name"));
  static const std::set<std::string> commands{"check-connection", "stratify", "shiho", "glue", "mf-validate", "cohomology", "verify-thm13", "selftest"};
  if (!commands.count(c.name)) n.at("name").fail("unknown command \"" + c.name + "\"");
  if (n.has("lifts")) c.lifts = list<std::string>(n.at("lifts"), as_string);
  if (n.has("cap_poly")) c.cap_poly = as_small(n.at("cap_poly"), 0, 4096);
  if (n.has("cap_pd")) c.cap_pd = as_small(n.at("cap_pd"), 1, 4096);
  if (n.has("bound")) c.bound = as_small(n.at("bound"), 1, 1 << 16);
  if (n.has("chart")) c.chart = as_small(n.at("chart"), 0, 1 << 16);
  if (n.has("seed")) {
    Node s = n.at("seed");
    if (!s.j.is_number_unsigned() && !(s.j.is_number_integer() && s.j.get<int64_t>() >= 0)) s.fail("expected a nonnegative integer");
    c.seed = s.j.get<uint64_t>();
  }
  return c;
}

// ---------------------------------------------------------------- writing

json coef_json(const Coef& c) { return c.size() == 1 ? json(c[0]) : json(c); }

json poly_json(const PolySpec& p) {
  json out = json::array();
  for (auto& t : p) out.push_back({t.e, coef_json(t.c)});
  return out;
}

json matrix_json(const MatrixSpec& m) {
  json out = json::array();
  for (auto& t : m) out.push_back({t.e, t.row, t.col, coef_json(t.c)});
  return out;
}

template <class T, class F>
json list_json(const std::vector<T>& v, F&& f) {
  json out = json::array();
  for (auto& x : v) out.push_back(f(x));
  return out;
}

json atlas_json(const AtlasSpec& a) {
  json out = json::object();
  if (!a.preset.empty()) out["preset"] = a.preset;
  if (a.preset == "affine" || a.preset == "torus") out["dim"] = a.dim;
  if (!a.factors.empty()) out["factors"] = list_json(a.factors, atlas_json);
  if (!a.charts.empty())
    out["charts"] = list_json(a.charts, [](const ChartSpec& c) {
      json o{{"dim", c.dim}};
      if (!c.name.empty()) o["name"] = c.name;
      if (!c.invertible.empty()) o["invertible"] = c.invertible;
      return o;
    });
  if (!a.overlaps.empty())
    out["overlaps"] = list_json(a.overlaps, [](const OverlapSpec& o) {
      json x{{"i", o.i}, {"j", o.j}, {"images", list_json(o.images, poly_json)}};
      if (!o.invertible_on_i.empty()) x["invertible_on_i"] = o.invertible_on_i;
      if (!o.inverse_images.empty()) x["inverse_images"] = list_json(o.inverse_images, poly_json);
      return x;
    });
  return out;
}

// ---------------------------------------------------------------- building

RingElem elem(const CoeffRing& R, const Coef& c, const std::string& ptr) {
  if (c.size() == 1) return R.from_int(c[0]);
  if (static_cast<int>(c.size()) != R.s)
    throw SchemaError(ptr, "expected 1 or " + std::to_string(R.s) + " coordinates, got " + std::to_string(c.size()));
  Coords cc{};
  for (int i = 0; i < R.s; ++i) cc[i] = c[i];
  return R.from_coords(cc);
}

LaurentPoly poly(const CoeffRing& R, int d, const PolySpec& p, const std::string& ptr) {
  LaurentPoly f(R, d);
  for (size_t k = 0; k < p.size(); ++k) {
    const std::string at = ptr + "/" + std::to_string(k);
    if (static_cast<int>(p[k].e.size()) != d) throw SchemaError(at + "/0", "exponent vector must have length " + std::to_string(d));
    f.add_term(p[k].e, elem(R, p[k].c, at + "/1"));
  }
  return f;
}

PolyMatrix matrix(const CoeffRing& R, int d, int rows, int cols, const MatrixSpec& m, const std::string& ptr) {
  PolyMatrix A = poly_zero_matrix(R, d, rows, cols);
  for (size_t k = 0; k < m.size(); ++k) {
    const std::string at = ptr + "/" + std::to_string(k);
    const MatrixTerm& t = m[k];
    if (static_cast<int>(t.e.size()) != d) throw SchemaError(at + "/0", "exponent vector must have length " + std::to_string(d));
    if (t.row >= rows) throw SchemaError(at + "/1", "row out of range (" + std::to_string(rows) + " rows)");
    if (t.col >= cols) throw SchemaError(at + "/2", "column out of range (" + std::to_string(cols) + " columns)");
    A[t.row][t.col].add_term(t.e, elem(R, t.c, at + "/3"));
  }
  return A;
}

Atlas build_atlas(const CoeffRing& R, const AtlasSpec& a, const std::string& ptr) {
  if (a.preset == "affine") return affine_atlas(R, a.dim);
  if (a.preset == "torus") return torus_atlas(R, a.dim);
  if (a.preset == "projective_line") return projective_line(R);
  if (a.preset == "product") {
    Atlas A = build_atlas(R, a.factors[0], ptr + "/factors/0");
    for (size_t k = 1; k < a.factors.size(); ++k)
      A = product_atlas(A, build_atlas(R, a.factors[k], ptr + "/factors/" + std::to_string(k)));
    return A;
  }
  Atlas A;
  const int d = a.charts[0].dim;
  for (size_t k = 0; k < a.charts.size(); ++k) {
    const ChartSpec& c = a.charts[k];
    const std::string at = ptr + "/charts/" + std::to_string(k);
    if (c.dim != d) throw SchemaError(at + "/dim", "all charts must have the same dimension");
    if (!c.invertible.empty() && static_cast<int>(c.invertible.size()) != d)
      throw SchemaError(at + "/invertible", "expected " + std::to_string(d) + " flags");
    A.charts.emplace_back(R, d, c.invertible, c.name.empty() ? "U" + std::to_string(k) : c.name);
    A.lifts.push_back(FrobLift::standard(A.charts.back(), "F" + std::to_string(k)));
  }
  const int nc = static_cast<int>(A.charts.size());
  for (size_t k = 0; k < a.overlaps.size(); ++k) {
    const OverlapSpec& o = a.overlaps[k];
    const std::string at = ptr + "/overlaps/" + std::to_string(k);
    if (!(o.i < o.j && o.j < nc)) throw SchemaError(at, "need i < j < number of charts");
    if (A.overlaps.count({o.i, o.j})) throw SchemaError(at, "duplicate overlap");
    if (!o.invertible_on_i.empty() && static_cast<int>(o.invertible_on_i.size()) != d)
      throw SchemaError(at + "/invertible_on_i", "expected " + std::to_string(d) + " flags");
    if (static_cast<int>(o.images.size()) != d) throw SchemaError(at + "/images", "expected " + std::to_string(d) + " images");
    if (!o.inverse_images.empty() && static_cast<int>(o.inverse_images.size()) != d)
      throw SchemaError(at + "/inverse_images", "expected " + std::to_string(d) + " images");
    std::vector<LaurentPoly> images, inverse;
    for (int i = 0; i < d; ++i) images.push_back(poly(R, d, o.images[i], at + "/images/" + std::to_string(i)));
    for (size_t i = 0; i < o.inverse_images.size(); ++i)
      inverse.push_back(poly(R, d, o.inverse_images[i], at + "/inverse_images/" + std::to_string(i)));
    std::vector<bool> inv = o.invertible_on_i.empty() ? std::vector<bool>(d, false) : o.invertible_on_i;
    A.add_overlap(o.i, o.j, inv, images, inverse);
  }
  return A;
}

}  // namespace

JobSpec parse_job(const json& root) {
  Node n = object(Node{root, ""}, {"format", "ring", "atlas", "lifts", "module", "command"}, {"format", "ring", "atlas"});
  JobSpec job;
  job.format = as_string(n.at("format"));
  if (job.format != kFormat) n.at("format").fail(std::string("expected \"") + kFormat + "\"");
  Node r = object(n.at("ring"), {"p", "n", "s"}, {"p", "n"});
  job.ring.p = as_small(r.at("p"), 2, 1 << 20);
  job.ring.n = as_small(r.at("n"), 1, 64);
  if (r.has("s")) job.ring.s = as_small(r.at("s"), 1, kMaxResidueDegree);
  job.atlas = parse_atlas(n.at("atlas"));
  if (n.has("lifts")) job.lifts = list<LiftSpec>(n.at("lifts"), parse_lift);
  std::set<std::string> names;
  for (size_t k = 0; k < job.lifts.size(); ++k)
    if (!names.insert(job.lifts[k].name).second) n.at("lifts").at(k).at("name").fail("duplicate lift name");
  if (n.has("module")) job.module = parse_module(n.at("module"));
  if (n.has("command")) job.command = parse_command(n.at("command"));
  return job;
}

JobSpec load_job(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("", "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("malformed JSON: ") + e.what());
  }
  return parse_job(j);
}

json to_json(const JobSpec& job) {
  json out;
  out["format"] = job.format;
  out["ring"] = {{"p", job.ring.p}, {"n", job.ring.n}, {"s", job.ring.s}};
  out["atlas"] = atlas_json(job.atlas);
  if (!job.lifts.empty())
    out["lifts"] = list_json(job.lifts, [](const LiftSpec& l) {
      json o{{"name", l.name}, {"chart", l.chart}};
      if (!l.corrections.empty()) o["corrections"] = list_json(l.corrections, poly_json);
      return o;
    });
  const ModuleSpec& m = job.module;
  json mod{{"kind", m.kind}, {"rank", m.rank}, {"lambda", m.lambda}};
  if (!m.charts.empty())
    mod["charts"] = list_json(m.charts, [](const LocalSpec& s) {
      json o = json::object();
      if (!s.connection.empty()) o["connection"] = list_json(s.connection, matrix_json);
      if (!s.filtration.empty())
        o["filtration"] = list_json(s.filtration, [](const std::vector<std::vector<Coef>>& M) {
          return list_json(M, [](const std::vector<Coef>& row) { return list_json(row, coef_json); });
        });
      if (!s.frobenius.empty()) o["frobenius"] = list_json(s.frobenius, matrix_json);
      return o;
    });
  if (!m.gluing.empty())
    mod["gluing"] = list_json(m.gluing, [](const GluingSpec& g) {
      return json{{"i", g.i}, {"j", g.j}, {"matrix", matrix_json(g.matrix)}};
    });
  out["module"] = mod;
  if (job.command) {
    const CommandSpec& c = *job.command;
    json cmd{{"name", c.name}};
    if (!c.lifts.empty()) cmd["lifts"] = c.lifts;
    if (c.cap_poly) cmd["cap_poly"] = *c.cap_poly;
    if (c.cap_pd) cmd["cap_pd"] = *c.cap_pd;
    if (c.bound) cmd["bound"] = *c.bound;
    if (c.chart) cmd["chart"] = *c.chart;
    if (c.seed) cmd["seed"] = *c.seed;
    out["command"] = cmd;
  }
  return out;
}

Built build(const JobSpec& job) {
  Built b;
  try {
    b.ring = &make_ring(job.ring.p, job.ring.n, job.ring.s);
  } catch (const std::exception& e) {
    throw SchemaError("/ring", e.what());
  }
  const CoeffRing& R = *b.ring;
  b.atlas = build_atlas(R, job.atlas, "/atlas");
  const int nc = static_cast<int>(b.atlas.charts.size());
  const int d = b.atlas.dim();

  std::vector<bool> claimed(nc, false);
  for (size_t k = 0; k < job.lifts.size(); ++k) {
    const LiftSpec& l = job.lifts[k];
    const std::string at = "/lifts/" + std::to_string(k);
    if (l.chart >= nc) throw SchemaError(at + "/chart", "no chart " + std::to_string(l.chart));
    const Chart& c = b.atlas.charts[l.chart];
    FrobLift F = FrobLift::standard(c, l.name);
    if (!l.corrections.empty()) {
      if (static_cast<int>(l.corrections.size()) != d) throw SchemaError(at + "/corrections", "expected " + std::to_string(d) + " corrections");
      const CoeffRing& U = R.at_level(R.n + 1);
      std::vector<LaurentPoly> a;
      for (int i = 0; i < d; ++i) a.push_back(poly(U, d, l.corrections[i], at + "/corrections/" + std::to_string(i)));
      F = FrobLift::with_corrections(c, a, l.name);
    }
    if (!claimed[l.chart]) {
      b.atlas.lifts[l.chart] = F;
      claimed[l.chart] = true;
    }
    b.lifts.emplace(l.name, F);
    b.lift_chart[l.name] = l.chart;
  }
  if (job.command)
    for (size_t k = 0; k < job.command->lifts.size(); ++k)
      if (!b.lifts.count(job.command->lifts[k]))
        throw SchemaError("/command/lifts/" + std::to_string(k), "unknown lift \"" + job.command->lifts[k] + "\"");

  const ModuleSpec& m = job.module;
  if (m.lambda != 0 && m.lambda != 1 && m.lambda != R.p)
    throw SchemaError("/module/lambda", "lambda must be 0, 1 or p");
  if (m.kind == "structure_sheaf") {
    b.module = structure_sheaf(b.atlas, m.lambda);
    return b;
  }
  if (static_cast<int>(m.charts.size()) != nc)
    throw SchemaError("/module/charts", "expected one entry per chart (" + std::to_string(nc) + ")");
  GluedModule G;
  G.atlas = b.atlas;
  int with_frobenius = 0;
  std::vector<std::vector<PolyMatrix>> phis(nc);
  for (int c = 0; c < nc; ++c) {
    const LocalSpec& s = m.charts[c];
    const std::string at = "/module/charts/" + std::to_string(c);
    ConnModule M = ConnModule::trivial(b.atlas.charts[c], m.rank, m.lambda);
    if (!s.connection.empty() && static_cast<int>(s.connection.size()) != d)
      throw SchemaError(at + "/connection", "expected one matrix per coordinate (" + std::to_string(d) + ")");
    for (size_t i = 0; i < s.connection.size(); ++i)
      M.A[i] = matrix(R, d, m.rank, m.rank, s.connection[i], at + "/connection/" + std::to_string(i));
    FilteredConnModule F = FilteredConnModule::trivial(M);
    int rows = m.rank;
    std::vector<int> ranks{m.rank};
    for (size_t i = 0; i < s.filtration.size(); ++i) {
      const std::string fi = at + "/filtration/" + std::to_string(i);
      const auto& D = s.filtration[i];
      if (static_cast<int>(D.size()) != rows) throw SchemaError(fi, "expected " + std::to_string(rows) + " rows");
      const int cols = D.empty() ? 0 : static_cast<int>(D[0].size());
      RingMatrix I(R, rows, cols);
      for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(D[r].size()) != cols) throw SchemaError(fi + "/" + std::to_string(r), "ragged matrix");
        for (int k = 0; k < cols; ++k) I.at(r, k) = elem(R, D[r][k], fi + "/" + std::to_string(r) + "/" + std::to_string(k));
      }
      F.incl.push_back(I);
      rows = cols;
      ranks.push_back(cols);
    }
    if (!s.frobenius.empty()) {
      if (s.frobenius.size() != ranks.size())
        throw SchemaError(at + "/frobenius", "expected phi^0.." + std::to_string(ranks.size() - 1));
      for (size_t i = 0; i < ranks.size(); ++i)
        phis[c].push_back(matrix(R, d, m.rank, ranks[i], s.frobenius[i], at + "/frobenius/" + std::to_string(i)));
      ++with_frobenius;
    }
    G.local.push_back(F);
  }
  if (with_frobenius != 0 && with_frobenius != nc)
    throw SchemaError("/module/charts", "Frobenius data must be given on every chart or on none");
  for (size_t k = 0; k < m.gluing.size(); ++k) {
    const GluingSpec& g = m.gluing[k];
    const std::string at = "/module/gluing/" + std::to_string(k);
    if (!b.atlas.overlaps.count({g.i, g.j})) throw SchemaError(at, "no overlap (" + std::to_string(g.i) + ", " + std::to_string(g.j) + ")");
    if (G.G.count({g.i, g.j})) throw SchemaError(at, "duplicate gluing");
    G.G[{g.i, g.j}] = matrix(R, d, m.rank, m.rank, g.matrix, at + "/matrix");
  }
  for (auto& [key, ov] : b.atlas.overlaps)
    if (!G.G.count(key)) G.G[key] = poly_identity(R, d, m.rank);
  if (with_frobenius)
    for (int c = 0; c < nc; ++c) G.frobenius.push_back(fontaine_from_phis(b.atlas.lifts[c], G.local[c], phis[c]));
  b.module = std::move(G);
  return b;
}

}  // namespace pdcrys::job
