// Minimal SPMD demo: a shared array, a global write through a pointer, and
// reads through a global reference from every unit. Run it under the
// launcher, e.g.  launch --units 4 --transport process -- ./hello

#include <cstdio>

#include "pgas/algorithms.hpp"
#include "pgas/array.hpp"
#include "pgas/spmd.hpp"

int main(int argc, char** argv) {
  return pgas::spmd::run_main(argc, argv, [](pgas::Runtime& rt, int, char**) {
    pgas::DistributedArray<int> a(1000);
    pgas::fill(a.begin(), a.end(), 0);

    pgas::GlobalRef<int> gref = a[999];
    if (rt.my_id().value == 0) {
      pgas::GlobalPointer<int> gptr = (a.end() - 1).to_global_pointer();
      pgas::deref(gptr) = 42;
    }
    pgas::barrier();

    std::printf("%u %d\n", rt.my_id().value, static_cast<int>(gref));
    std::printf("%u %d\n", rt.my_id().value, static_cast<int>(a[0]));
    return static_cast<int>(gref) == 42 ? 0 : 1;
  });
}
