#include "tnlab/lines3d.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include "tnlab/rotsym.hpp"

namespace tnlab {

void check_admissible(const TorusFamily& fam) {
  if (!(fam.B2 >= 0)) throw AdmissibilityError("torus family needs B2 >= 0, got " + format_double(fam.B2));
  if (!(fam.C2 >= -2 * fam.B2)) {
    throw AdmissibilityError("torus family needs C2 >= -2 B2, got B2 = " + format_double(fam.B2) +
                             ", C2 = " + format_double(fam.C2));
  }
  if (fam.branch != 1 && fam.branch != -1) throw AdmissibilityError("branch must be +1 or -1");
}

GraphSection torus_section(const TorusFamily& fam) {
  check_admissible(fam);
  const cplx unit(0, fam.branch);
  auto g = [fam, unit](double r) { return unit * std::sqrt(fam.psi(r)); };
  auto dg = [fam, unit](double r) {
    const double psi_dot = 2 * fam.C2 * r + 4 * fam.B2 * r * r * r;
    return unit * psi_dot / (2 * std::sqrt(fam.psi(r)));
  };
  return rotational_section(ConformalGeometry::round_sphere(), g, dg);
}

std::vector<SignatureClass> signature_profile(const TorusFamily& fam,
                                              const std::vector<double>& r_samples) {
  const GraphSection s = torus_section(fam);
  std::vector<SignatureClass> out;
  out.reserve(r_samples.size());
  for (double r : r_samples) out.push_back(signature_class(slopes(s, cplx(r, 0))));
  return out;
}

OrientedLine to_oriented_line(const TangentPoint& p) {
  const double x = p.xi.real(), y = p.xi.imag();
  const double a = p.eta.real(), b = p.eta.imag();
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(a) || !std::isfinite(b)) {
    throw ChartError("to_oriented_line: non-finite point " + format_point(p.xi));
  }
  const double s = x * x + y * y;
  const double d = 1 + s;
  const double d2 = d * d;
  const Vec3 dir(2 * x / d, 2 * y / d, (1 - s) / d);
  const Vec3 dx(2 * (1 + y * y - x * x) / d2, -4 * x * y / d2, -4 * x / d2);
  const Vec3 dy(-4 * x * y / d2, 2 * (1 + x * x - y * y) / d2, -4 * y / d2);
  return {dir, a * dx + b * dy};
}

namespace {

struct NodeLine {
  double r;
  double theta;
  OrientedLine line;
};

std::vector<NodeLine> node_lines(const GraphSection& s, const AnnulusGrid& grid) {
  std::vector<NodeLine> out;
  for (double r : grid.lattice_radii()) {
    for (double th : grid.lattice_angles()) {
      const cplx xi = std::polar(r, th);
      out.push_back({r, th, to_oriented_line({xi, s.F(xi)})});
    }
  }
  return out;
}

}  // namespace

ExportSummary export_congruence(const GraphSection& s, const AnnulusGrid& grid, std::ostream& out,
                                const ExportOptions& opts) {
  std::vector<std::vector<NodeLine>> sheets{node_lines(s, grid)};
  if (opts.second_branch) sheets.push_back(node_lines(*opts.second_branch, grid));

  ExportSummary summary;
  double max_foot = 0;
  for (const auto& sheet : sheets)
    for (const auto& n : sheet) max_foot = std::max(max_foot, n.line.foot.norm());
  summary.half_length = opts.half_length ? *opts.half_length : 3 * (1 + max_foot);
  if (!(summary.half_length > 0)) throw DomainError("export: half_length must be positive");
  const double len = summary.half_length;

  if (opts.format == ExportFormat::csv) {
    out << "R,theta,dx,dy,dz,fx,fy,fz\n";
    for (const auto& sheet : sheets) {
      for (const auto& n : sheet) {
        const auto& d = n.line.direction;
        const auto& f = n.line.foot;
        out << format_double(n.r) << ',' << format_double(n.theta) << ',' << format_double(d.x())
            << ',' << format_double(d.y()) << ',' << format_double(d.z()) << ','
            << format_double(f.x()) << ',' << format_double(f.y()) << ',' << format_double(f.z())
            << '\n';
        ++summary.rows;
      }
    }
    return summary;
  }

  const std::size_t n_theta = grid.lattice_angles().size();
  const std::size_t n_r = grid.lattice_radii().size();
  out << "# oriented line congruence: " << n_r << " radii x " << n_theta << " angles, half_length "
      << format_double(len) << "\n";
  for (const auto& sheet : sheets) {
    for (const auto& n : sheet) {
      for (double side : {-1.0, 1.0}) {
        const Vec3 v = n.line.foot + side * len * n.line.direction;
        out << "v " << format_double(v.x()) << ' ' << format_double(v.y()) << ' '
            << format_double(v.z()) << '\n';
        ++summary.vertices;
      }
    }
  }
  // Node (i, j) of sheet k owns OBJ vertices 1 + 2 (k n_r n_theta + i n_theta + j) and the next one.
  for (std::size_t k = 0; k < sheets.size(); ++k) {
    for (std::size_t i = 0; i + 1 < n_r; ++i) {
      for (std::size_t j = 0; j < n_theta; ++j) {
        const std::size_t a = 1 + 2 * (k * n_r * n_theta + i * n_theta + j);
        const std::size_t b = a + 2 * n_theta;
        out << "f " << a << ' ' << b << ' ' << b + 1 << ' ' << a + 1 << '\n';
        ++summary.faces;
      }
    }
  }
  return summary;
}

ExportSummary export_congruence(const GraphSection& s, const AnnulusGrid& grid,
                                const std::string& path, const ExportOptions& opts) {
  std::ofstream file(path);
  if (!file) throw IoError("cannot open " + path + " for writing");
  const ExportSummary summary = export_congruence(s, grid, file, opts);
  file.flush();
  if (!file) throw IoError("write to " + path + " failed");
  return summary;
}

}  // namespace tnlab
