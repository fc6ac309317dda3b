#include <cstdio>
#include <cstdlib>
#include <string>

#include "acceptance.hpp"

int main(int argc, char** argv) {
  uint64_t seed = pdcrys::acceptance::kDefaultSeed;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--seed" && i + 1 < argc) {
      seed = std::strtoull(argv[++i], nullptr, 10);
    } else {
      std::fprintf(stderr, "usage: %s [--seed N]\n", argv[0]);
      return 2;
    }
  }
  int failed = 0;
  pdcrys::acceptance::run_all(seed, [&](const pdcrys::acceptance::Outcome& o) {
    std::printf("%s\n", pdcrys::acceptance::format_line(o).c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  });
  std::printf("%d of 12 criteria failed\n", failed);
  return failed ? 1 : 0;
}
