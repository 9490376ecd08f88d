#include "frostlab/parallel.hpp"

#include <cstdlib>

namespace frostlab {

int ThreadCount() {
  if (const char* s = std::getenv("FROSTLAB_THREADS")) {
    int n = std::atoi(s);
    if (n > 0) return n;
  }
  unsigned h = std::thread::hardware_concurrency();
  return h == 0 ? 1 : static_cast<int>(h);
}

}  // namespace frostlab
