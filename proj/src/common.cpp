#include "iclab/common.hpp"

namespace iclab {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::domain: return "domain";
    case ErrorKind::spec: return "spec";
    case ErrorKind::manifold: return "manifold";
    case ErrorKind::linalg: return "linear-algebra";
    case ErrorKind::instability: return "instability";
    case ErrorKind::io: return "io";
    case ErrorKind::schema: return "schema";
    case ErrorKind::version: return "version";
    case ErrorKind::mode_mismatch: return "mode-mismatch";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::argument: return "argument";
  }
  return "unknown";
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool all_finite(const Eigen::Ref<const MatrixXd>& m) { return m.allFinite(); }

}  // namespace iclab
