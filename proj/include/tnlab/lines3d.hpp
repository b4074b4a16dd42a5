#pragma once

// TS^2 as the space of oriented affine lines of R^3, the torus family on the
// round sphere, and export of line congruences as ruled-surface meshes.
//
// Incidence convention: the direction of the line over xi is the inverse
// stereographic image
//   X(xi) = (2x, 2y, 1 - |xi|^2) / (1 + |xi|^2),   xi = 0 -> (0, 0, 1),
// and the perpendicular foot is the pushforward dX(p d/dx + q d/dy) of the
// real tangent vector eta d/dxi + conj(eta) d/dxibar.

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tnlab/ambient.hpp"
#include "tnlab/graphs.hpp"
#include "tnlab/numerics.hpp"

namespace tnlab {

using Vec3 = Eigen::Vector3d;

struct OrientedLine {
  Vec3 direction;
  Vec3 foot;
};

/// F = branch i (B2 + C2 R^2 + B2 R^4)^{1/2} e^{i theta} on the round sphere.
struct TorusFamily {
  double B2 = 1;
  double C2 = 0;
  int branch = 1;

  double psi(double r) const { return B2 + C2 * r * r + B2 * r * r * r * r; }
};

/// Throws AdmissibilityError unless B2 >= 0, C2 >= -2 B2 and branch = +-1.
void check_admissible(const TorusFamily& fam);

GraphSection torus_section(const TorusFamily& fam);

/// Classification of the induced metric at R e^{i 0} for each sample.
std::vector<SignatureClass> signature_profile(const TorusFamily& fam,
                                              const std::vector<double>& r_samples);

/// Throws ChartError for non-finite input.
OrientedLine to_oriented_line(const TangentPoint& p);

enum class ExportFormat { obj, csv };

struct ExportOptions {
  ExportFormat format = ExportFormat::obj;
  /// Defaults to 3 (1 + max |foot|) over the exported nodes.
  std::optional<double> half_length;
  /// The other branch of a double cover, exported after the first with its
  /// own vertices and quads.
  std::optional<GraphSection> second_branch;
};

struct ExportSummary {
  std::size_t vertices = 0;
  std::size_t faces = 0;
  std::size_t rows = 0;
  double half_length = 0;
};

/// One line per lattice node of the grid. OBJ: the two segment endpoints
/// foot -+ half_length direction per node, and one counter-clockwise quad
/// between consecutive lattice radii for each angle. CSV: header
/// R,theta,dx,dy,dz,fx,fy,fz and one row per node.
ExportSummary export_congruence(const GraphSection& s, const AnnulusGrid& grid, std::ostream& out,
                                const ExportOptions& opts = {});

/// Same, to a file; stream failures raise IoError.
ExportSummary export_congruence(const GraphSection& s, const AnnulusGrid& grid,
                                const std::string& path, const ExportOptions& opts = {});

}  // namespace tnlab
