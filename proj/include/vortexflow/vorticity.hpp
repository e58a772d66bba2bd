#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vortexflow/geometry.hpp"
#include "vortexflow/kernels.hpp"
#include "vortexflow/potential.hpp"

namespace vflow {

struct Atom {
  Vec2 pos = Vec2::Zero();
  double strength = 0.0;
};

struct Blob {
  Vec2 center = Vec2::Zero();
  double strength = 0.0;
  double radius = 0.1;
  Profile profile = Profile::Bump;
};

// Piecewise constant density on cells of a uniform lattice; only nonzero
// cells are stored. area < h^2 marks a cell clipped by the boundary.
struct GridCell {
  int i = 0, j = 0;
  double value = 0.0;  // density
  double area = 0.0;
};

struct GridDensity {
  Vec2 origin = Vec2::Zero();  // lower-left corner of cell (0, 0)
  double h = 0.0;
  std::vector<GridCell> cells;

  Vec2 center(const GridCell& c) const { return origin + h * Vec2(c.i + 0.5, c.j + 0.5); }
  bool empty() const { return cells.empty(); }
};

// Value of a quadrature together with an error estimate.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

// Bounded measure: atoms + radial blobs + gridded density.
class VorticityMeasure {
 public:
  VorticityMeasure() = default;
  VorticityMeasure(std::vector<Atom> atoms, std::vector<Blob> blobs, GridDensity grid = {});

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Blob>& blobs() const { return blobs_; }
  const GridDensity& grid() const { return grid_; }
  bool empty() const { return atoms_.empty() && blobs_.empty() && grid_.empty(); }
  bool has_atoms() const { return !atoms_.empty(); }

  double total_mass() const;
  double total_variation() const;

  // Atoms exact, blobs by polar product rules (error from a refined rule), grid by the midpoint rule.
  Estimate integrate(const std::function<double(const Vec2&)>& f) const;
  Vec2 integrate_vector(const std::function<Vec2(const Vec2&)>& f) const;

  // Radial charges seen by the potential solver: atoms as points, blobs as
  // themselves, grid cells as equal-area uniform disks.
  std::vector<Charge> charges() const;
  // Weighted points sampling the measure (atoms exact).
  std::vector<WeightedPoint> sample_points(int blob_nr = 0, int blob_nt = 0) const;

  // Support check: every piece lies in the fluid at distance > margin.
  void validate(const Domain& d, double margin = 1e-3) const;

  VorticityMeasure scaled(double s) const;
  VorticityMeasure operator+(const VorticityMeasure& o) const;
  VorticityMeasure with_atoms(std::vector<Atom> atoms) const;
  VorticityMeasure with_blob_centers(const std::vector<Vec2>& centers) const;

 private:
  std::vector<Atom> atoms_;
  std::vector<Blob> blobs_;
  GridDensity grid_;
};

// Density sampled at cell centres of the lattice covering [lo, hi]; cells cut
// by the boundary get the fluid area fraction from 8x8 sub-sampling.
GridDensity sample_grid(const Domain& d, const std::function<double(const Vec2&)>& density, const Vec2& lo,
                        const Vec2& hi, double h);

// omega^n = (chi_n omega) * eta_n on a lattice of spacing 1/(2 n cells_per_radius).
VorticityMeasure mollify(const Domain& d, const VorticityMeasure& w, double n, int cells_per_radius = 4);

enum class NormMode { Energy, GridQuadrature };

struct NormReport {
  double value = 0.0;
  double tolerance = 0.0;  // estimated quadrature error of the value
  double tail = 0.0;       // far-field contribution (grid mode)
};

// ||K[omega]||_{L^2}. Energy mode: -int psi d omega with psi = int G d omega.
// Grid mode: direct quadrature of |K[omega]|^2 over the fluid.
NormReport h_minus_one_norm(const PotentialSolver& S, const VorticityMeasure& w, NormMode mode = NormMode::Energy,
                            double grid_h = 0.0);

// CSV blocks: "[atoms]" rows x,y,strength and "[blobs]" rows x,y,strength,radius[,profile].
VorticityMeasure read_measure_csv(const std::string& path);
void write_measure_csv(const std::string& path, const VorticityMeasure& w);
// Binary grid: magic, origin, h, bbox cell range, then dense values (row major) and areas.
void write_grid_binary(const std::string& path, const GridDensity& g);
GridDensity read_grid_binary(const std::string& path);

}  // namespace vflow
