#pragma once

#include <array>
#include <span>
#include <vector>

#include "sixcal/geometry.hpp"

namespace sixcal {

// Quadric with cross terms only, over the monomials
// (XY, XZ, XW, YZ, YW, ZW). It vanishes on e1..e4 structurally and on
// (1,1,1,1) because its coefficients sum to zero.
struct ViewQuadric {
  Vector6d coeffs = Vector6d::Zero();

  double Evaluate(const WorldPoint& x) const;
};

// Monomial vector (XY, XZ, XW, YZ, YW, ZW) of a point.
Vector6d CrossMonomials(const WorldPoint& x);

// Quadric of admissible sixth points for one view. The view is moved into
// the canonical frame where x1..x4 become e1, e2, e3, (1,1,1); the cameras
// mapping the projective basis onto x1..x5 form a one-parameter family, and
// the quadric is the elimination determinant of the two incidence equations
// of x6 over that family. Throws kDegenerateQuad, kDegenerateView.
ViewQuadric ComputeViewQuadric(std::span<const ImagePoint, 6> points);

struct SixthPointCandidates {
  std::vector<WorldPoint> points;  // unit norm, at most 3
  double discriminant = 0.0;      // normalized discriminant of the cubic
  int cubic_real_roots = 0;       // with multiplicity
};

// Intersects the three view quadrics. Works in the 3-dimensional nullspace
// of the stacked coefficient rows, where the monomial rank-1 conditions
// become two conics sharing the known point (1,...,1); the pencil of lines
// through that point gives a cubic whose roots are the remaining
// intersections. Throws kRankDefect, kNoRealCandidate,
// kBasisPointCoincidence.
SixthPointCandidates ComputeSixthPointCandidates(const ViewQuadric& q1, const ViewQuadric& q2,
                                                 const ViewQuadric& q3);

// Recovers the point from its monomial vector, anchoring on the coordinate
// whose product ratio uses the largest entries. Returns false when m does
// not correspond to a finite real point.
bool PointFromCrossMonomials(const Vector6d& m, WorldPoint* x);

// DLT resection from six points: the 18 cross-product rows, solved by the
// smallest right singular vector. Unit Frobenius norm, fixed sign. Throws
// kRankDefect.
Camera ResectCamera(std::span<const ImagePoint, 6> view_points,
                    std::span<const WorldPoint, 6> world_points);

struct SixPointSolutionSet {
  std::vector<ProjectiveTriplet> solutions;  // ascending residual
  double discriminant = 0.0;
  int cubic_real_roots = 0;
  int candidate_count = 0;
};

// Full projective reconstruction: candidates for X6, resection of all three
// cameras against (e1..e4, (1,1,1,1), X6) on raw pixels, then H0. Throws
// kEmptySolutionSet when no candidate survives, or the first-stage error.
SixPointSolutionSet ProjectiveReconstruction(const SixViewCorrespondences& corr);

}  // namespace sixcal
