#pragma once

// Frozen reference tables shared across the decomposition tests.

#include "tricorr/box.hpp"

namespace testref {

using tricorr::BipartiteBox;
using tricorr::SingleBox;

// Conditional pair boxes of the canonical dimension-4 decomposition of the
// noisy Mermin family: sign of V in the diagonal entries per (y,z) row.
inline BipartiteBox conditional_pair_box(int lambda, double V) {
  static const int sign[4][4] = {{+1, +1, +1, -1},
                                 {-1, -1, -1, +1},
                                 {-1, +1, +1, +1},
                                 {+1, -1, -1, -1}};
  BipartiteBox out;
  for (int y = 0; y < 2; ++y)
    for (int z = 0; z < 2; ++z) {
      double s = sign[lambda][y * 2 + z] * V;
      out.at(y, z, 0, 0) = out.at(y, z, 1, 1) = (1 + s) / 4;
      out.at(y, z, 0, 1) = out.at(y, z, 1, 0) = (1 - s) / 4;
    }
  return out;
}

// The unique constrained solution of the Q0=Q2 merge: merged piece plus the
// two remaining pieces, diagonal-signed with coefficients {0, +-1, +-2} of V.
inline BipartiteBox merged_solution_box(int which, double V) {
  // which: 0 -> merged (n1), 1 -> lambda-1 piece (n2), 2 -> lambda-3 piece (n3)
  static const int coeff[3][4] = {{0, +1, +1, 0},    // n1
                                  {-2, -1, -1, +2},  // n2
                                  {+2, -1, -1, -2}}; // n3
  BipartiteBox out;
  for (int y = 0; y < 2; ++y)
    for (int z = 0; z < 2; ++z) {
      double s = coeff[which][y * 2 + z] * V;
      out.at(y, z, 0, 0) = out.at(y, z, 1, 1) = (1 + s) / 4;
      out.at(y, z, 0, 1) = out.at(y, z, 1, 0) = (1 - s) / 4;
    }
  return out;
}

// Single-qubit conditional tables of the bipartite decomposition.
inline SingleBox conditional_qubit_table(int lambda, double V) {
  SingleBox out = SingleBox::uniform();
  int row = lambda < 2 ? 0 : 1;
  double s = (lambda % 2 == 0 ? +2 : -2) * V;
  out.at(row, 0) = (1 + s) / 2;
  out.at(row, 1) = (1 - s) / 2;
  return out;
}

}  // namespace testref
