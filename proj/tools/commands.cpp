#include "commands.hpp"

#include <cstdio>
#include <sstream>

#include "acceptance.hpp"

namespace pdcrys::cli {

using nlohmann::json;

namespace {

constexpr int kDefaultBound = 64;

json elem_json(const RingElem& x) {
  if (x.ring().s == 1) return x.to_int();
  json out = json::array();
  for (int i = 0; i < x.ring().s; ++i) out.push_back(x.c[i]);
  return out;
}

json dense(const RingMatrix& M) {
  json out = json::array();
  for (int i = 0; i < M.rows; ++i) {
    json row = json::array();
    for (int j = 0; j < M.cols; ++j) row.push_back(elem_json(M.at(i, j)));
    out.push_back(row);
  }
  return out;
}

json sparse(const PolyMatrix& A) {
  json out = json::array();
  for (size_t i = 0; i < A.size(); ++i)
    for (size_t j = 0; j < A[i].size(); ++j)
      for (auto& [e, c] : A[i][j].terms) out.push_back({e, i, j, elem_json(c)});
  return out;
}

std::string list_str(const std::vector<int>& v) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << "]";
  return os.str();
}

std::string yes(bool b) { return b ? "yes" : "no"; }

std::string matrix_text(const PolyMatrix& A) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < A.size(); ++i) {
    os << (i ? "; " : "");
    for (size_t j = 0; j < A[i].size(); ++j) os << (j ? ", " : "") << A[i][j].str();
  }
  os << "]";
  return os.str();
}

std::string header(const job::Built& b, const Options& o) {
  const CoeffRing& R = *b.ring;
  std::ostringstream os;
  os << "# pdcrys " << o.command << "\n\n";
  os << "- job: `" << o.job_path << "`\n";
  os << "- ring: W_" << R.n << "(F_" << R.p;
  if (R.s > 1) os << "^" << R.s;
  os << ")\n";
  os << "- charts: " << b.atlas.charts.size() << ", dimension " << b.atlas.dim() << "\n";
  os << "- module: rank " << b.module.rank() << ", lambda " << b.module.lambda() << "\n\n";
  return os.str();
}

json ring_json(const CoeffRing& R) { return {{"p", R.p}, {"n", R.n}, {"s", R.s}}; }

void begin(Report& r, const job::Built& b, const Options& o) {
  r.data["command"] = o.command;
  r.data["ring"] = ring_json(*b.ring);
  r.data["dimension"] = b.atlas.dim();
  r.data["charts"] = b.atlas.charts.size();
  r.data["rank"] = b.module.rank();
  r.data["lambda"] = b.module.lambda();
  r.markdown = header(b, o);
}

void finish(Report& r) {
  r.data["ok"] = r.ok;
  r.markdown += std::string("\n**verdict: ") + (r.ok ? "PASS" : "FAIL") + "**\n";
}

std::vector<int> selected_charts(const job::Built& b, const Options& o) {
  const int nc = static_cast<int>(b.atlas.charts.size());
  if (o.chart) {
    if (*o.chart >= nc) throw job::SchemaError("/command/chart", "no chart " + std::to_string(*o.chart));
    return {*o.chart};
  }
  std::vector<int> all(nc);
  for (int c = 0; c < nc; ++c) all[c] = c;
  return all;
}

const FrobLift& lift_for(const job::Built& b, const Options& o, int chart, size_t which = 0) {
  if (o.lifts.size() > which) {
    const FrobLift& F = b.lifts.at(o.lifts[which]);
    if (b.lift_chart.at(o.lifts[which]) != chart)
      throw job::SchemaError("/command/lifts/" + std::to_string(which),
                             "lift \"" + o.lifts[which] + "\" is not on chart " + std::to_string(chart));
    return F;
  }
  return b.atlas.lifts.at(chart);
}

Caps caps_of(const Options& o) {
  Caps c;
  if (o.cap_poly) c.poly = *o.cap_poly;
  if (o.cap_pd) c.pd = *o.cap_pd;
  return c;
}

}  // namespace

Options merge(const job::JobSpec& spec, Options cli) {
  if (!spec.command || spec.command->name != cli.command) return cli;
  const job::CommandSpec& c = *spec.command;
  if (!cli.cap_poly) cli.cap_poly = c.cap_poly;
  if (!cli.cap_pd) cli.cap_pd = c.cap_pd;
  if (!cli.bound) cli.bound = c.bound;
  if (!cli.chart) cli.chart = c.chart;
  if (!cli.seed) cli.seed = c.seed;
  if (cli.lifts.empty()) cli.lifts = c.lifts;
  return cli;
}

Report check_connection(const job::Built& b, const Options& o) {
  Report r;
  begin(r, b, o);
  const int bound = o.bound.value_or(kDefaultBound);
  const CoeffRing& R = *b.ring;
  std::ostringstream md;
  md << "| chart | integrable | quasi-nilpotent | order | p-curvature zero |\n|---|---|---|---|---|\n";
  json charts = json::array();
  for (int c : selected_charts(b, o)) {
    const ConnModule& M = b.module.local[c].M;
    const bool integrable = check_integrable(M);
    NilpotenceResult q = quasi_nilpotence_order(M, bound);
    json e{{"chart", c}, {"name", M.chart.name}, {"integrable", integrable}, {"quasi_nilpotent", q.ok}, {"order", q.order}};
    std::string pc = "n/a";
    if (M.lambda == 1 && R.n == 1) {
      bool zero = true;
      for (auto& P : p_curvature(M)) zero = zero && poly_is_zero(P);
      e["p_curvature_zero"] = zero;
      pc = yes(zero);
    }
    if (!q.ok) {
      json w = json::array();
      for (auto& [I, j] : q.witnesses) w.push_back({I, j});
      e["nilpotence_witnesses"] = w;
    }
    r.ok = r.ok && integrable && q.ok;
    charts.push_back(e);
    md << "| " << c << " | " << yes(integrable) << " | " << yes(q.ok) << " | " << (q.ok ? std::to_string(q.order) : "> " + std::to_string(bound))
       << " | " << pc << " |\n";
  }
  ValidationReport g = validate_glued(b.module);
  r.ok = r.ok && g.valid;
  r.data["local"] = charts;
  r.data["gluing_valid"] = g.valid;
  r.data["gluing_failures"] = g.failures;
  md << "\nGluing horizontal and cocycle: " << yes(g.valid) << "\n";
  for (auto& f : g.failures) md << "- " << f << "\n";
  r.markdown += md.str();
  finish(r);
  return r;
}

Report stratify_module(const job::Built& b, const Options& o) {
  Report r;
  begin(r, b, o);
  const int bound = o.bound.value_or(kDefaultBound);
  const int p = b.ring->p;
  std::ostringstream md;
  md << "| chart | flavor | entries | counit | cocycle |\n|---|---|---|---|---|\n";
  json charts = json::array();
  for (int c : selected_charts(b, o)) {
    const ConnModule& M = b.module.local[c].M;
    if (M.lambda != 1 && M.lambda != p)
      throw std::invalid_argument("stratify needs lambda = 1 or lambda = p, got " + std::to_string(M.lambda));
    const Flavor f = M.lambda == 1 ? Flavor::P : Flavor::T;
    StratTable S = stratify(M, f, bound);
    CocycleReport v = verify_cocycle(S);
    json entries = json::array();
    for (auto& [I, A] : S.entries) entries.push_back({{"I", I}, {"matrix", sparse(A)}});
    charts.push_back({{"chart", c},
                      {"flavor", flavor_name(f)},
                      {"entries", entries},
                      {"counit_ok", v.counit_ok},
                      {"cocycle_ok", v.cocycle_ok},
                      {"detail", v.detail}});
    r.ok = r.ok && v.ok();
    md << "| " << c << " | " << flavor_name(f) << " | " << S.entries.size() << " | " << yes(v.counit_ok) << " | " << yes(v.cocycle_ok)
       << " |\n";
    if (!v.detail.empty()) md << "\n" << v.detail << "\n";
  }
  r.data["local"] = charts;
  r.markdown += md.str();
  finish(r);
  return r;
}

Report shiho(const job::Built& b, const Options& o) {
  Report r;
  begin(r, b, o);
  const int bound = o.bound.value_or(kDefaultBound);
  std::ostringstream md;
  md << "| chart | lift | integrable | quasi-nilpotent | order |\n|---|---|---|---|---|\n";
  json charts = json::array();
  for (int c : selected_charts(b, o)) {
    const FrobLift& F = lift_for(b, o, c);
    ConnModule B = shiho_phi(F, b.module.local[c].M, bound);
    const bool integrable = check_integrable(B);
    NilpotenceResult q = quasi_nilpotence_order(B, bound * b.ring->p);
    json A = json::array();
    for (auto& Ai : B.A) A.push_back(sparse(Ai));
    charts.push_back({{"chart", c}, {"lift", F.name}, {"connection", A}, {"integrable", integrable}, {"quasi_nilpotent", q.ok}, {"order", q.order}});
    r.ok = r.ok && integrable && q.ok;
    md << "| " << c << " | " << F.name << " | " << yes(integrable) << " | " << yes(q.ok) << " | " << q.order << " |\n";
    for (size_t i = 0; i < B.A.size(); ++i) md << "\nA_" << i << " = " << matrix_text(B.A[i]) << "\n";
  }
  r.data["local"] = charts;
  r.markdown += md.str();
  finish(r);
  return r;
}

Report glue(const job::Built& b, const Options& o) {
  Report r;
  begin(r, b, o);
  if (o.lifts.size() != 3) throw job::SchemaError("/command/lifts", "glue needs exactly three lifts");
  const int bound = o.bound.value_or(kDefaultBound);
  const int chart = b.lift_chart.at(o.lifts[0]);
  const FrobLift& F1 = lift_for(b, o, chart, 0);
  const FrobLift& F2 = lift_for(b, o, chart, 1);
  const FrobLift& F3 = lift_for(b, o, chart, 2);
  GammaModule G = GammaModule::from_connection(b.module.local[chart].M, bound);
  ValidationReport gv = validate_gamma(G);
  const bool cocycle = verify_glue_cocycle(F1, F2, F3, G);
  std::ostringstream md;
  md << "Chart " << chart << ", lifts " << F1.name << ", " << F2.name << ", " << F3.name << "\n\n";
  md << "| pair | horizontal |\n|---|---|\n";
  json pairs = json::array();
  bool horizontal = true;
  for (auto [X, Y] : {std::pair{&F1, &F2}, {&F2, &F3}, {&F1, &F3}}) {
    GlueIso iso = glue_alpha(*X, *Y, G);
    const bool h = check_horizontal(iso.alpha, iso.source, iso.target);
    horizontal = horizontal && h;
    pairs.push_back({{"from", X->name}, {"to", Y->name}, {"alpha", sparse(iso.alpha)}, {"horizontal", h}});
    md << "| alpha(" << X->name << ", " << Y->name << ") | " << yes(h) << " |\n";
  }
  r.ok = gv.valid && cocycle && horizontal;
  r.data["chart"] = chart;
  r.data["gamma_valid"] = gv.valid;
  r.data["cocycle"] = cocycle;
  r.data["alphas"] = pairs;
  md << "\nGamma-module valid: " << yes(gv.valid) << "\n\nalpha(F1,F2) alpha(F2,F3) = alpha(F1,F3): " << yes(cocycle) << "\n";
  r.markdown += md.str();
  finish(r);
  return r;
}

Report mf_validate(const job::Built& b, const Options& o) {
  Report r;
  begin(r, b, o);
  if (!b.module.has_frobenius()) throw job::SchemaError("/module", "no Frobenius data to validate");
  std::ostringstream md;
  md << "| chart | lift | length | Griffiths | horizontal | phi^i = p phi^{i+1} | spans | strongly divisible |\n"
     << "|---|---|---|---|---|---|---|---|\n";
  json charts = json::array();
  auto row = [&](int c, const FontaineModule& FM) {
    MFReport v = validate_MF(FM);
    charts.push_back({{"chart", c},
                      {"lift", FM.F.name},
                      {"length_ok", v.length_ok},
                      {"griffiths_ok", v.griffiths_ok},
                      {"horizontal_ok", v.horizontal_ok},
                      {"divisibility_ok", v.d_i_ok},
                      {"spans_ok", v.d_iii_ok},
                      {"strongly_divisible", v.strongly_divisible},
                      {"valid", v.valid()},
                      {"witnesses", v.witnesses}});
    r.ok = r.ok && v.valid() && v.strongly_divisible;
    md << "| " << c << " | " << FM.F.name << " | " << yes(v.length_ok) << " | " << yes(v.griffiths_ok) << " | " << yes(v.horizontal_ok)
       << " | " << yes(v.d_i_ok) << " | " << yes(v.d_iii_ok) << " | " << yes(v.strongly_divisible) << " |\n";
    for (auto& w : v.witnesses) md << "\n- " << w << "\n";
  };
  for (int c : selected_charts(b, o)) {
    const FontaineModule& FM = b.module.frobenius[c];
    row(c, FM);
    for (size_t k = 0; k < o.lifts.size(); ++k) {
      if (b.lift_chart.at(o.lifts[k]) == c) row(c, change_of_lift(FM, b.lifts.at(o.lifts[k])));
    }
  }
  r.data["local"] = charts;
  r.markdown += md.str();
  finish(r);
  return r;
}

namespace {

void cohomology_tables(const CohomologyReport& rep, Report& r, std::ostringstream& md) {
  json degrees = json::array();
  md << "| m | H^m | images of H^m(F^i), i = 0.." << rep.p - 1 << " |\n|---|---|---|\n";
  for (auto& D : rep.degrees) {
    json d{{"m", D.m}, {"invariants", D.invariants}, {"filtration", D.filtration}};
    json inj = json::array();
    for (auto& v : D.injective)
      inj.push_back({{"i", v.i}, {"in_range", v.in_range}, {"holds", v.holds}, {"witness", v.witness}});
    d["injective"] = inj;
    if (!D.phi.empty()) {
      json phi = json::array();
      for (auto& M : D.phi) phi.push_back(dense(M));
      d["phi"] = phi;
      d["phi_lift_independent"] = D.phi_lift_independent;
    }
    if (D.mf)
      d["mf"] = {{"in_range", D.mf_in_range},
                 {"length_ok", D.mf->length_ok},
                 {"divisibility_ok", D.mf->divisibility_ok},
                 {"spans", D.mf->spans},
                 {"ok", D.mf->ok()}};
    degrees.push_back(d);
    md << "| " << D.m << " | " << list_str(D.invariants) << " |";
    for (auto& f : D.filtration) md << " " << list_str(f);
    md << " |\n";
  }
  r.data["degrees"] = degrees;
}

}  // namespace

Report cohomology(const job::Built& b, const Options& o) {
  Report r;
  begin(r, b, o);
  Engine E(b.module, caps_of(o));
  std::ostringstream md;
  CohomologyReport rep;
  rep.p = E.p();
  for (int m = 0; m <= E.max_degree(); ++m) rep.degrees.push_back(degree_report(E, m));
  for (auto& D : rep.degrees) D.injective.clear();
  r.data["cap"] = E.cap();
  md << "Weight cap " << E.cap() << ", certified by an acyclic shell.\n\n";
  cohomology_tables(rep, r, md);
  json e1 = json::array();
  md << "\n| r | s | E1 | length |\n|---|---|---|---|\n";
  for (int m = 0; m <= E.max_degree(); ++m)
    for (int rr = 0; rr <= m; ++rr) {
      const Group& g = E.group(m, Variant::graded(rr));
      if (g.length() == 0) continue;
      e1.push_back({{"r", rr}, {"s", m - rr}, {"invariants", g.invariants()}, {"length", g.length()}});
      md << "| " << rr << " | " << m - rr << " | " << list_str(g.invariants()) << " | " << g.length() << " |\n";
    }
  r.data["e1"] = e1;
  r.markdown += md.str();
  finish(r);
  return r;
}

Report verify_thm13(const job::Built& b, const Options& o) {
  Report r;
  begin(r, b, o);
  Engine E(b.module, caps_of(o));
  CohomologyReport rep = verify_theorem(E);
  r.ok = rep.all_in_range_pass();
  std::ostringstream md;
  md << "p = " << rep.p << ", n = " << rep.n << ", d = " << rep.d << ", filtration length " << rep.ell << ", weight cap "
     << rep.cap << ", PD cap " << rep.pd_cap << "\n\n";
  r.data["p"] = rep.p;
  r.data["n"] = rep.n;
  r.data["d"] = rep.d;
  r.data["ell"] = rep.ell;
  r.data["cap"] = rep.cap;
  r.data["pd_cap"] = rep.pd_cap;
  r.data["notes"] = rep.notes;
  cohomology_tables(rep, r, md);

  md << "\n### Injectivity of H^m(F^i) -> H^m\n\n| m | i | in range | holds |\n|---|---|---|---|\n";
  for (auto& D : rep.degrees)
    for (auto& v : D.injective) md << "| " << v.m << " | " << v.i << " | " << yes(v.in_range) << " | " << yes(v.holds) << " |\n";

  bool any_phi = false;
  for (auto& D : rep.degrees) any_phi = any_phi || !D.phi.empty();
  if (any_phi) {
    md << "\n### Divided Frobenius\n\n| m | in range | length | divisibility | spans | lift independent |\n|---|---|---|---|---|---|\n";
    for (auto& D : rep.degrees) {
      if (!D.mf) continue;
      bool same = true;
      for (bool x : D.phi_lift_independent) same = same && x;
      md << "| " << D.m << " | " << yes(D.mf_in_range) << " | " << yes(D.mf->length_ok) << " | " << yes(D.mf->divisibility_ok) << " | "
         << yes(D.mf->spans) << " | " << yes(same) << " |\n";
    }
  }

  json e1 = json::array();
  md << "\n### E1\n\n| r | s | E1 | E_inf length | in range | d1 = 0 |\n|---|---|---|---|---|---|\n";
  for (auto& e : rep.e1) {
    e1.push_back({{"r", e.r},
                  {"s", e.s},
                  {"invariants", e.invariants},
                  {"length", e.length},
                  {"e_infinity", e.e_infinity},
                  {"in_range", e.in_range},
                  {"d1_zero", e.d1_zero},
                  {"witness", e.witness}});
    md << "| " << e.r << " | " << e.s << " | " << list_str(e.invariants) << " | " << e.e_infinity << " | " << yes(e.in_range) << " | "
       << yes(e.d1_zero) << " |\n";
  }
  r.data["e1"] = e1;

  json lam = json::array();
  if (!rep.lambda.empty()) md << "\n### Lambda and psi\n\n| m | H^m(Lambda) | psi iso | psi in range | exact | in range |\n|---|---|---|---|---|---|\n";
  for (auto& L : rep.lambda) {
    lam.push_back({{"m", L.m},
                   {"invariants", L.invariants},
                   {"psi_iso", L.psi_iso},
                   {"psi_mono", L.psi_mono},
                   {"psi_in_range", L.psi_in_range},
                   {"sequence_exact", L.sequence_exact},
                   {"in_range", L.in_range},
                   {"lengths", {L.left, L.middle, L.right}},
                   {"witness", L.witness}});
    md << "| " << L.m << " | " << list_str(L.invariants) << " | " << yes(L.psi_iso) << " | " << yes(L.psi_in_range) << " | "
       << yes(L.sequence_exact) << " | " << yes(L.in_range) << " |\n";
  }
  r.data["lambda"] = lam;
  if (!rep.notes.empty()) {
    md << "\n";
    for (auto& n : rep.notes) md << "- " << n << "\n";
  }
  r.markdown += md.str();
  finish(r);
  return r;
}

Report selftest(const Options& o) {
  Report r;
  const uint64_t seed = o.seed.value_or(acceptance::kDefaultSeed);
  r.data["command"] = "selftest";
  r.data["seed"] = seed;
  std::ostringstream md;
  md << "# pdcrys selftest\n\nseed " << seed << "\n\n| criterion | result | detail |\n|---|---|---|\n";
  json rows = json::array();
  auto progress = [](const acceptance::Outcome& c) { std::fprintf(stderr, "%s\n", acceptance::format_line(c).c_str()); };
  for (auto& c : acceptance::run_all(seed, progress)) {
    rows.push_back({{"id", c.id}, {"name", c.name}, {"pass", c.pass}, {"limit_seconds", c.limit}, {"detail", c.detail}});
    md << "| " << c.id << ". " << c.name << " | " << (c.pass ? "pass" : "fail") << " | " << c.detail << " |\n";
    r.ok = r.ok && c.pass;
  }
  r.data["criteria"] = rows;
  r.markdown = md.str();
  finish(r);
  return r;
}

}  // namespace pdcrys::cli
