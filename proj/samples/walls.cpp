// Moves a stability condition along a path and reports the walls it crosses.
#include <iostream>

#include "stabp2/stab.hpp"

int main() {
  using namespace stabp2;
  StabilityChart start = StabilityChart::make({}, {cplx(-1, 0.2), cplx(0.5, 0.1), cplx(0.5, 0.7)});
  Charges a = fixed_charges(start);
  // push Z(S_0) through the negative real axis (keeping Z(O_x) = i), then
  // swing Z(S_2) round to the right and come back
  Charges b = a;
  b[0] = cplx(-1, -0.2);
  b[1] = cplx(0.5, 0.5);
  Charges c = b;
  c[2] = cplx(2.0, 0.7);
  c[1] = cplx(-1.0, 0.5);
  auto [end, events] = continue_path(start, {a, b, c, b, a});
  for (auto& e : events) std::cout << to_json(e).dump() << "\n";
  std::cout << "final chart " << to_json(end).dump() << "\n";
  std::cout << "Z(O_x) = " << charge_of(end, ox_class()) << "\n";
}
