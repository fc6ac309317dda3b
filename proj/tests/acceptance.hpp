#ifndef PDCRYS_ACCEPTANCE_HPP
#define PDCRYS_ACCEPTANCE_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace pdcrys::acceptance {

struct Outcome {
  int id = 0;
  std::string name;
  bool pass = false;
  double seconds = 0;
  double limit = 0;
  std::string detail;
};

constexpr uint64_t kDefaultSeed = 20240611;

// runs every criterion in order; `report` sees each outcome as soon as it is known
std::vector<Outcome> run_all(uint64_t seed, const std::function<void(const Outcome&)>& report = {});
std::string format_line(const Outcome& o);

}  // namespace pdcrys::acceptance

#endif
