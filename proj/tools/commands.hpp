#ifndef PDCRYS_COMMANDS_HPP
#define PDCRYS_COMMANDS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "job.hpp"

namespace pdcrys::cli {

struct Options {
  std::string command;
  std::string job_path;
  std::optional<int> cap_poly, cap_pd, bound, chart;
  std::optional<uint64_t> seed;
  std::vector<std::string> lifts;
};

struct Report {
  nlohmann::json data = nlohmann::json::object();
  std::string markdown;
  bool ok = true;
};

// command options from the job's command block, overridden by the command line
Options merge(const job::JobSpec& spec, Options cli);

Report check_connection(const job::Built& b, const Options& o);
Report stratify_module(const job::Built& b, const Options& o);
Report shiho(const job::Built& b, const Options& o);
Report glue(const job::Built& b, const Options& o);
Report mf_validate(const job::Built& b, const Options& o);
Report cohomology(const job::Built& b, const Options& o);
Report verify_thm13(const job::Built& b, const Options& o);
Report selftest(const Options& o);

}  // namespace pdcrys::cli

#endif
