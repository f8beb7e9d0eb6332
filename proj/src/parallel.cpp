#include "hotkit/parallel.hpp"

#include <omp.h>

namespace hotkit {

namespace {
int default_threads() {
  static const int n = omp_get_max_threads();
  return n;
}
}  // namespace

void set_num_threads(int threads) {
  const int base = default_threads();
  omp_set_num_threads(threads > 0 ? threads : base);
}

int num_threads() { return omp_get_max_threads(); }

}  // namespace hotkit
