#pragma once

#include <iosfwd>
#include <vector>

#include "qlab/field.hpp"
#include "qlab/mesh.hpp"

namespace qlab {

// Almgren frequency data of a field around a center:
//   D(r) = energy of the ball restriction (crossing edges weighted by the
//          inside fraction of their dual cell),
//   H(r) = shell estimate of the boundary L^2 mass (shell of width 2h
//          centered at r, cell-clipped, spherical-measure compensated),
//   I(r) = r D(r) / H(r) where H > 0.
struct FrequencyProfile {
  Vec center{0, 0, 0};
  double h = 0.0;
  std::vector<double> radii;
  std::vector<double> D;
  std::vector<double> H;
  std::vector<double> I;  // NaN where H == 0
  bool degenerate = false;

  void export_csv(std::ostream& out) const;  // r,D,H,I
  void export_csv_file(const std::string& path) const;
};

// Largest radius at which a profile shell still fits inside the meshed
// extent from this center.
double max_profile_radius(const Mesh& mesh, const Vec& center);

FrequencyProfile frequency_profile(const MultiField& f, const Vec& center,
                                   std::vector<double> radii);

struct MonotoneCheck {
  bool pass = false;
  double worst_violation = 0.0;  // largest negative increment I(r_k) - I(r_{k+1})
};

// I must be non-decreasing up to slack on consecutive defined entries.
MonotoneCheck check_monotone(const FrequencyProfile& p, double slack);

enum class CornerVerdict { Pass, Fail, Inconclusive };

struct CornerBoundResult {
  CornerVerdict verdict = CornerVerdict::Inconclusive;
  double plateau = 0.0;  // median of I at the three smallest reliable radii
};

// Reliable radii are r >= 8h. The small-radius plateau of a corner profile
// with zero wall data must reach the exponent bound 2 (within 0.15).
CornerBoundResult corner_frequency_bound(const FrequencyProfile& p);

// theta, r -> sum_i << v_i sin(k theta) r^k >>, vanishing on both walls
// theta = 0, pi/2; for k = 2 this is the extremal 2-homogeneous family.
struct HomogeneousSolution2D {
  int k = 2;
  std::vector<std::vector<double>> sheets;  // the vectors v_i
  int q() const { return static_cast<int>(sheets.size()); }
  int n() const { return sheets.empty() ? 0 : static_cast<int>(sheets[0].size()); }
  QPoint at(double x1, double x2) const;
};

HomogeneousSolution2D homogeneous_2d_solution(int k, std::vector<std::vector<double>> v_list);

// Samples the solution onto every vertex of a 2-d mesh.
MultiField sample_field(const Mesh& mesh, const HomogeneousSolution2D& sol);

struct HeightDecayResult {
  bool pass = false;
  double worst_ratio = 0.0;  // max over sampled radii of LHS / RHS
};

// Discrete check of the height bound
//   int_{B_r} |u|^2 <= (1/(m+1)) (r/R)^{m-1+2 alpha} R int_{dB_R} |u|^2
// with 20% slack, over sampled radii r <= R/2 (R = mesh outer radius).
HeightDecayResult height_decay_check(const MultiField& f, const Vec& center, double alpha);

}  // namespace qlab
