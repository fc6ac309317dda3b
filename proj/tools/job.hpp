#ifndef PDCRYS_JOB_HPP
#define PDCRYS_JOB_HPP

// Job files: a ring, an atlas with named Frobenius lifts, a glued module and an optional
// command block.  Parsing is strict; every error names the offending JSON pointer.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdcrys/cohom.hpp"

namespace pdcrys::job {

inline constexpr const char* kFormat = "pdcrys-job/1";

struct SchemaError : std::runtime_error {
  std::string pointer;
  std::string message;
  SchemaError(const std::string& ptr, const std::string& msg)
      : std::runtime_error((ptr.empty() ? std::string("/") : ptr) + ": " + msg), pointer(ptr), message(msg) {}
};

// an integer, or s Witt-vector coordinates when s > 1
using Coef = std::vector<int64_t>;

struct Term {
  Exp e;
  Coef c;
  bool operator==(const Term&) const = default;
};
using PolySpec = std::vector<Term>;

// [exponent-vector, row, col, coefficient]
struct MatrixTerm {
  Exp e;
  int row = 0, col = 0;
  Coef c;
  bool operator==(const MatrixTerm&) const = default;
};
using MatrixSpec = std::vector<MatrixTerm>;

struct RingSpec {
  int p = 0, n = 0, s = 1;
  bool operator==(const RingSpec&) const = default;
};

struct ChartSpec {
  std::string name;
  int dim = 0;
  std::vector<bool> invertible;
  bool operator==(const ChartSpec&) const = default;
};

struct OverlapSpec {
  int i = 0, j = 0;
  std::vector<bool> invertible_on_i;
  std::vector<PolySpec> images;
  std::vector<PolySpec> inverse_images;  // optional; derived for monomial transitions
  bool operator==(const OverlapSpec&) const = default;
};

struct AtlasSpec {
  std::string preset;  // affine, torus, projective_line, product, or empty for explicit
  int dim = 0;
  std::vector<AtlasSpec> factors;
  std::vector<ChartSpec> charts;
  std::vector<OverlapSpec> overlaps;
  bool operator==(const AtlasSpec&) const = default;
};

// F(t_k) = t_k^p + p a_k on chart `chart`, a_k read at level n + 1
struct LiftSpec {
  std::string name;
  int chart = 0;
  std::vector<PolySpec> corrections;
  bool operator==(const LiftSpec&) const = default;
};

struct LocalSpec {
  std::vector<MatrixSpec> connection;                   // one per coordinate
  std::vector<std::vector<std::vector<Coef>>> filtration;  // dense M^{i+1} -> M^i
  std::vector<MatrixSpec> frobenius;                    // phi^0 .. phi^l
  bool operator==(const LocalSpec&) const = default;
};

struct GluingSpec {
  int i = 0, j = 0;
  MatrixSpec matrix;
  bool operator==(const GluingSpec&) const = default;
};

struct ModuleSpec {
  std::string kind = "structure_sheaf";  // or explicit
  int rank = 1;
  int lambda = 1;
  std::vector<LocalSpec> charts;
  std::vector<GluingSpec> gluing;
  bool operator==(const ModuleSpec&) const = default;
};

struct CommandSpec {
  std::string name;
  std::vector<std::string> lifts;
  std::optional<int> cap_poly, cap_pd, bound, chart;
  std::optional<uint64_t> seed;
  bool operator==(const CommandSpec&) const = default;
};

struct JobSpec {
  std::string format = kFormat;
  RingSpec ring;
  AtlasSpec atlas;
  std::vector<LiftSpec> lifts;
  ModuleSpec module;
  std::optional<CommandSpec> command;
  bool operator==(const JobSpec&) const = default;
};

JobSpec parse_job(const nlohmann::json& j);
JobSpec load_job(const std::string& path);
nlohmann::json to_json(const JobSpec& job);

// ---------------------------------------------------------------- building

struct Built {
  const CoeffRing* ring = nullptr;
  Atlas atlas;
  std::map<std::string, FrobLift> lifts;  // named lifts; atlas lifts default to the first per chart
  std::map<std::string, int> lift_chart;
  GluedModule module;
};

Built build(const JobSpec& job);

}  // namespace pdcrys::job

#endif
