// Prints the twisted periods along the small quantum locus as CSV.
#include <cstdio>

#include "stabp2/ssc.hpp"

int main() {
  using namespace stabp2;
  PeriodGauge g = make_period_gauge();
  std::printf("z,ReW0,ImW0,ReW1,ImW1,ReW2,ImW2\n");
  for (int k = 1; k <= 30; ++k) {
    double z = 0.03 * k;
    auto s = period_map_small_locus(g, z);
    std::printf("%.4f", z);
    for (auto& w : s.W) std::printf(",%.12f,%.12f", w.real(), w.imag());
    std::printf("\n");
  }
}
