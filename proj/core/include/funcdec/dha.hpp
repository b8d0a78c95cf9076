#pragma once

#include "funcdec/decomp.hpp"

namespace funcdec {

// Three-mode discrete hybrid automaton with state x and input u:
//   d1 = [x >= 0], d2 = [x + u - 1 >= 0]
//   mode 1 if (d1, d2) = (0, 0), mode 2 if d1 = 1, mode 3 if (d1, d2) = (0, 1)
//   x+ = x + u - 1 (mode 1), 2x (mode 2), 2 (mode 3)
struct DhaStep {
    bool d1 = false;
    bool d2 = false;
    int mode = 1;
    double next = 0.0;
};

DhaStep dha_simulate(double x, double u);

// The next-state map built observable by observable with deduplication:
// x+ = (1-d1)(1-d2)(x+u-1) + d1*(2x) + 2*(1-d1)*d2.
FunctionalDecomposition dha_decomposition();

// Affine chains folded, then graph reduction.
FunctionalDecomposition dha_reduced();

// Reads d1 and d2 from the step observables of any decomposition built by
// the two functions above (the step of input x is d1, the other d2).
DhaStep dha_evaluate(const FunctionalDecomposition& fd, double x, double u);

} // namespace funcdec
