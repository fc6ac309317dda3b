#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace pdcrys;

namespace {

enum Exit { kOk = 0, kAssertion = 1, kSchema = 2, kCap = 3 };

struct Output {
  std::string out_dir;
  std::string format = "md";
};

void emit(const cli::Report& r, const Output& out, bool print = true) {
  const std::string json_text = r.data.dump(2) + "\n";
  if (!out.out_dir.empty()) {
    std::filesystem::create_directories(out.out_dir);
    std::ofstream(std::filesystem::path(out.out_dir) / "report.json") << json_text;
    std::ofstream(std::filesystem::path(out.out_dir) / "report.md") << r.markdown;
  }
  if (print) std::cout << (out.format == "json" ? json_text : r.markdown);
}

int fail(const cli::Options& o, const Output& out, int code, const std::string& kind, const std::string& where, const std::string& msg) {
  std::string ctx = o.job_path.empty() ? o.command : o.job_path;
  std::fprintf(stderr, "%s: %s error at %s: %s\n", ctx.c_str(), kind.c_str(), where.empty() ? "/" : where.c_str(), msg.c_str());
  cli::Report r;
  r.ok = false;
  r.data = {{"command", o.command}, {"ok", false}, {"error", {{"kind", kind}, {"location", where}, {"message", msg}, {"exit_code", code}}}};
  r.markdown = "# pdcrys " + o.command + "\n\n" + kind + " error at `" + (where.empty() ? "/" : where) + "`: " + msg + "\n";
  if (!out.out_dir.empty()) emit(r, out, false);
  return code;
}

int run(int argc, char** argv) {
  CLI::App app{"Crystalline computations over truncated Witt vectors"};
  app.require_subcommand(1);
  cli::Options opt;
  Output out;
  int cap_poly = -1, cap_pd = -1, bound = -1, chart = -1;
  uint64_t seed = 0;
  std::string lifts;

  struct Sub {
    const char* name;
    const char* help;
    cli::Report (*fn)(const job::Built&, const cli::Options&);
  };
  const Sub subs[] = {
      {"check-connection", "integrability, quasi-nilpotence and gluing of the module", cli::check_connection},
      {"stratify", "stratification tables with counit and cocycle checks", cli::stratify_module},
      {"shiho", "Frobenius pullback of a p-connection to a connection", cli::shiho},
      {"glue", "gluing isomorphisms for three lifts and their cocycle", cli::glue},
      {"mf-validate", "Fontaine module axioms and strong divisibility", cli::mf_validate},
      {"cohomology", "cohomology groups with Hodge filtration and E1 terms", cli::cohomology},
      {"verify-thm13", "injectivity, MF structure, E1 degeneration and Lambda verdicts", cli::verify_thm13},
  };
  auto common = [&](CLI::App* s) {
    s->add_option("--cap-poly", cap_poly, "weight cap for cohomology")->check(CLI::NonNegativeNumber);
    s->add_option("--cap-pd", cap_pd, "divided-power cap")->check(CLI::PositiveNumber);
    s->add_option("--seed", seed, "seed for randomized suites");
    s->add_option("--out", out.out_dir, "directory for report.json and report.md");
    s->add_option("--format", out.format, "stdout format")->check(CLI::IsMember({"json", "md"}));
  };
  for (const Sub& s : subs) {
    CLI::App* sc = app.add_subcommand(s.name, s.help);
    sc->add_option("job", opt.job_path, "job file")->required();
    sc->add_option("--lifts", lifts, "comma separated lift names");
    sc->add_option("--bound", bound, "nilpotence bound")->check(CLI::PositiveNumber);
    sc->add_option("--chart", chart, "restrict to one chart")->check(CLI::NonNegativeNumber);
    common(sc);
  }
  CLI::App* self = app.add_subcommand("selftest", "run the acceptance suite");
  common(self);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kSchema;
  }
  CLI::App* used = app.get_subcommands().front();
  opt.command = used->get_name();
  auto given = [&](const char* flag) { return used->get_option_no_throw(flag) && used->count(flag) > 0; };
  if (given("--cap-poly")) opt.cap_poly = cap_poly;
  if (given("--cap-pd")) opt.cap_pd = cap_pd;
  if (given("--seed")) opt.seed = seed;
  if (opt.command != "selftest") {
    if (given("--bound")) opt.bound = bound;
    if (given("--chart")) opt.chart = chart;
    if (given("--lifts")) {
      std::stringstream ss(lifts);
      for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) opt.lifts.push_back(item);
    }
  }

  try {
    cli::Report r;
    if (opt.command == "selftest") {
      r = cli::selftest(opt);
    } else {
      job::JobSpec spec = job::load_job(opt.job_path);
      // names from --lifts are checked here, names from the command block by build()
      for (auto& name : opt.lifts) {
        bool known = false;
        for (auto& l : spec.lifts) known = known || l.name == name;
        if (!known) throw job::SchemaError("--lifts", "no lift named \"" + name + "\" in /lifts");
      }
      opt = cli::merge(spec, opt);
      job::Built b = job::build(spec);
      for (const Sub& s : subs)
        if (opt.command == s.name) r = s.fn(b, opt);
    }
    emit(r, out);
    return r.ok ? kOk : kAssertion;
  } catch (const job::SchemaError& e) {
    return fail(opt, out, kSchema, "schema", e.pointer, e.message);
  } catch (const StabilizationFailure& e) {
    return fail(opt, out, kCap, "cap", opt.command, e.what());
  } catch (const TruncationOverflow& e) {
    return fail(opt, out, kCap, "cap", opt.command, e.what());
  } catch (const NilpotenceBoundExceeded& e) {
    return fail(opt, out, kCap, "cap", opt.command, e.what());
  } catch (const std::exception& e) {
    return fail(opt, out, kAssertion, "assertion", opt.command, e.what());
  }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
