#include "vortexflow/vorticity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "vortexflow/errors.hpp"
#include "vortexflow/quadrature.hpp"

namespace vflow {

VorticityMeasure::VorticityMeasure(std::vector<Atom> atoms, std::vector<Blob> blobs, GridDensity grid)
    : atoms_(std::move(atoms)), blobs_(std::move(blobs)), grid_(std::move(grid)) {
  for (const auto& b : blobs_)
    if (!(b.radius > 0.0) || b.profile == Profile::Point)
      throw Error(ErrorCode::InvalidArgument, "blobs need a positive radius and a smooth profile");
}

double VorticityMeasure::total_mass() const {
  double m = 0.0;
  for (const auto& a : atoms_) m += a.strength;
  for (const auto& b : blobs_) m += b.strength;
  for (const auto& c : grid_.cells) m += c.value * c.area;
  return m;
}

double VorticityMeasure::total_variation() const {
  double m = 0.0;
  for (const auto& a : atoms_) m += std::abs(a.strength);
  for (const auto& b : blobs_) m += std::abs(b.strength);
  for (const auto& c : grid_.cells) m += std::abs(c.value) * c.area;
  return m;
}

namespace {

Charge blob_charge(const Blob& b) { return Charge{b.center, b.strength, b.radius, b.profile}; }

double blob_integral(const Blob& b, const std::function<double(const Vec2&)>& f, int nr, int nt) {
  double s = 0.0;
  for (const auto& p : charge_quadrature(blob_charge(b), nr, nt)) s += p.w * f(p.x);
  return s;
}

int default_nr(Profile p) { return p == Profile::Gaussian ? 24 : (p == Profile::TopHat ? 8 : 10); }
int default_nt(Profile p) { return p == Profile::Gaussian ? 24 : (p == Profile::TopHat ? 16 : 20); }

}  // namespace

Estimate VorticityMeasure::integrate(const std::function<double(const Vec2&)>& f) const {
  Estimate e;
  for (const auto& a : atoms_) e.value += a.strength * f(a.pos);
  for (const auto& b : blobs_) {
    const int nr = default_nr(b.profile), nt = default_nt(b.profile);
    const double coarse = blob_integral(b, f, nr, nt);
    const double fine = blob_integral(b, f, 2 * nr, 2 * nt);
    e.value += fine;
    e.error += std::abs(fine - coarse);
  }
  const double h = grid_.h;
  for (const auto& c : grid_.cells) {
    const Vec2 x = grid_.center(c);
    const double m = c.value * c.area;
    const double coarse = m * f(x);
    double fine = 0.0;
    for (int a = -1; a <= 1; a += 2)
      for (int b = -1; b <= 1; b += 2) fine += 0.25 * m * f(x + 0.25 * h * Vec2(a, b));
    e.value += coarse;
    e.error += std::abs(fine - coarse);
  }
  return e;
}

Vec2 VorticityMeasure::integrate_vector(const std::function<Vec2(const Vec2&)>& f) const {
  Vec2 s = Vec2::Zero();
  for (const auto& p : sample_points()) s += p.w * f(p.x);
  return s;
}

std::vector<Charge> VorticityMeasure::charges() const {
  std::vector<Charge> q;
  q.reserve(atoms_.size() + blobs_.size() + grid_.cells.size());
  for (const auto& a : atoms_) q.push_back({a.pos, a.strength, 0.0, Profile::Point});
  for (const auto& b : blobs_) q.push_back(blob_charge(b));
  for (const auto& c : grid_.cells)
    q.push_back({grid_.center(c), c.value * c.area, std::sqrt(c.area / pi), Profile::TopHat});
  return q;
}

std::vector<WeightedPoint> VorticityMeasure::sample_points(int nr, int nt) const {
  std::vector<WeightedPoint> out;
  for (const auto& a : atoms_) out.push_back({a.pos, a.strength});
  for (const auto& b : blobs_)
    for (const auto& p : charge_quadrature(blob_charge(b), nr, nt)) out.push_back(p);
  for (const auto& c : grid_.cells) out.push_back({grid_.center(c), c.value * c.area});
  return out;
}

void VorticityMeasure::validate(const Domain& d, double margin) const {
  for (const auto& a : atoms_)
    if (!d.contains(a.pos, margin))
      throw Error(ErrorCode::PointOutsideDomain, "atom closer than the support margin to the boundary or outside");
  for (const auto& b : blobs_)
    if (!d.contains(b.center, margin + support_radius(blob_charge(b))))
      throw Error(ErrorCode::PointOutsideDomain, "blob support reaches the boundary");
  for (const auto& c : grid_.cells)
    if (c.value != 0.0 && !d.contains(grid_.center(c), 0.0))
      throw Error(ErrorCode::PointOutsideDomain, "grid cell centre outside the fluid");
}

VorticityMeasure VorticityMeasure::scaled(double s) const {
  VorticityMeasure w = *this;
  for (auto& a : w.atoms_) a.strength *= s;
  for (auto& b : w.blobs_) b.strength *= s;
  for (auto& c : w.grid_.cells) c.value *= s;
  return w;
}

VorticityMeasure VorticityMeasure::operator+(const VorticityMeasure& o) const {
  VorticityMeasure w = *this;
  w.atoms_.insert(w.atoms_.end(), o.atoms_.begin(), o.atoms_.end());
  w.blobs_.insert(w.blobs_.end(), o.blobs_.begin(), o.blobs_.end());
  if (w.grid_.empty()) {
    w.grid_ = o.grid_;
  } else if (!o.grid_.empty()) {
    if (o.grid_.h != w.grid_.h || (o.grid_.origin - w.grid_.origin).norm() != 0.0)
      throw Error(ErrorCode::InvalidArgument, "cannot add grids on different lattices");
    w.grid_.cells.insert(w.grid_.cells.end(), o.grid_.cells.begin(), o.grid_.cells.end());
  }
  return w;
}

VorticityMeasure VorticityMeasure::with_atoms(std::vector<Atom> atoms) const {
  VorticityMeasure w = *this;
  w.atoms_ = std::move(atoms);
  return w;
}

VorticityMeasure VorticityMeasure::with_blob_centers(const std::vector<Vec2>& centers) const {
  VorticityMeasure w = *this;
  for (size_t i = 0; i < w.blobs_.size(); ++i) w.blobs_[i].center = centers.at(i);
  return w;
}

GridDensity sample_grid(const Domain& d, const std::function<double(const Vec2&)>& f, const Vec2& lo, const Vec2& hi,
                        double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid spacing must be positive");
  GridDensity g;
  g.origin = lo;
  g.h = h;
  const int nx = int(std::ceil((hi - lo).x() / h)), ny = int(std::ceil((hi - lo).y() / h));
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const Vec2 x = lo + h * Vec2(i + 0.5, j + 0.5);
      const auto p = d.project(x);
      double frac = p.in_fluid ? 1.0 : 0.0;
      if (p.distance < 0.75 * h) {
        int inside = 0;
        for (int a = 0; a < 8; ++a)
          for (int b = 0; b < 8; ++b) inside += d.contains(lo + h * Vec2(i + (a + 0.5) / 8, j + (b + 0.5) / 8));
        frac = inside / 64.0;
      }
      if (frac == 0.0) continue;
      const double v = f(x);
      if (v != 0.0) g.cells.push_back({i, j, v, frac * h * h});
    }
  return g;
}

VorticityMeasure mollify(const Domain& d, const VorticityMeasure& w, double n, int cells_per_radius) {
  if (cells_per_radius < 4) throw Error(ErrorCode::ResolutionTooLow, "mollification needs at least 4 cells per radius");
  if (!(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "mollification index must be positive");
  const double eps = 0.5 / n;
  const double h = eps / cells_per_radius;
  const CutoffFamily chi(d, n);

  // Point masses to spread: atoms, blob densities sampled on the lattice, input grid cells.
  std::vector<WeightedPoint> masses;
  for (const auto& a : w.atoms()) masses.push_back({a.pos, a.strength});
  for (const auto& b : w.blobs()) {
    const Charge q = blob_charge(b);
    const double R = support_radius(q);
    const int i0 = int(std::floor((b.center.x() - R) / h)), i1 = int(std::ceil((b.center.x() + R) / h));
    const int j0 = int(std::floor((b.center.y() - R) / h)), j1 = int(std::ceil((b.center.y() + R) / h));
    std::vector<WeightedPoint> pts;
    double tot = 0.0;
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j) {
        const Vec2 x = h * Vec2(i + 0.5, j + 0.5);
        const double v = density(q, x) * h * h;
        if (v != 0.0) {
          pts.push_back({x, v});
          tot += v;
        }
      }
    if (tot == 0.0) {
      masses.push_back({b.center, b.strength});
      continue;
    }
    for (auto& p : pts) p.w *= b.strength / tot;
    masses.insert(masses.end(), pts.begin(), pts.end());
  }
  for (const auto& c : w.grid().cells) masses.push_back({w.grid().center(c), c.value * c.area});

  std::unordered_map<std::int64_t, double> acc;
  auto key = [](std::int64_t i, std::int64_t j) { return (i << 32) ^ (j & 0xffffffffLL); };
  const int r = cells_per_radius + 1;
  struct Entry {
    std::int64_t key;
    double e;
    Eigen::Vector3d v;  // (1, x - p)
  };
  std::vector<Entry> stencil;
  for (const auto& p : masses) {
    const double c = chi(p.x);
    if (c == 0.0) continue;
    const int ic = int(std::floor(p.x.x() / h)), jc = int(std::floor(p.x.y() / h));
    stencil.clear();
    double tot = 0.0;
    for (int i = ic - r; i <= ic + r; ++i)
      for (int j = jc - r; j <= jc + r; ++j) {
        const Vec2 dx = h * Vec2(i + 0.5, j + 0.5) - p.x;
        const double e = mollifier_eta(n, dx);
        if (e > 0.0) {
          stencil.push_back({key(i, j), e, Eigen::Vector3d(1.0, dx.x(), dx.y())});
          tot += e;
        }
      }
    if (tot == 0.0) continue;
    // Rescale by b + a.(x - p) so the discrete stencil has unit mass and centroid p exactly;
    // kept only when every weight stays positive.
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
    for (const auto& s : stencil) M += (s.e / tot) * s.v * s.v.transpose();
    const Eigen::Vector3d ab = M.ldlt().solve(Eigen::Vector3d(1.0, 0.0, 0.0));
    bool positive = ab.allFinite();
    for (const auto& s : stencil) positive = positive && ab.dot(s.v) > 0.0;
    for (const auto& s : stencil) acc[s.key] += c * p.w * (positive ? ab.dot(s.v) : 1.0) * s.e / tot;
  }

  GridDensity g;
  g.origin = Vec2::Zero();
  g.h = h;
  g.cells.reserve(acc.size());
  for (const auto& [k, m] : acc) {
    if (m == 0.0) continue;
    const int i = int(k >> 32);
    const int j = int(std::int32_t(k & 0xffffffffLL));
    g.cells.push_back({i, j, m / (h * h), h * h});
  }
  std::sort(g.cells.begin(), g.cells.end(), [](const GridCell& a, const GridCell& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  return VorticityMeasure({}, {}, std::move(g));
}

namespace {

double cell_pair_energy(const Charge& a, const Charge& b) {
  const double D = (a.pos - b.pos).norm();
  if (D >= support_radius(a) + support_radius(b)) return a.strength * b.strength / two_pi * std::log(D);
  return pair_energy(a, b);
}

}  // namespace

NormReport h_minus_one_norm(const PotentialSolver& S, const VorticityMeasure& w, NormMode mode, double grid_h) {
  if (w.has_atoms()) throw Error(ErrorCode::UnresolvedSingularity, "the H^-1 norm of an atom is infinite");
  NormReport rep;
  if (w.empty()) return rep;
  const auto q = w.charges();
  const SourceField F = S.sources(q);
  if (mode == NormMode::Energy) {
    // -int psi d omega; the regular part is harmonic so its average over a radial charge is its centre value.
    double e = 0.0, mag = 0.0;
    for (size_t a = 0; a < q.size(); ++a) {
      const double s = self_energy(q[a]) + q[a].strength * F.regular_value(q[a].pos);
      e += s;
      mag += std::abs(s);
      for (size_t b = a + 1; b < q.size(); ++b) {
        const double p = 2.0 * cell_pair_energy(q[a], q[b]);
        e += p;
        mag += std::abs(p);
      }
    }
    rep.value = std::sqrt(std::max(0.0, -e));
    rep.tolerance = (1e-13 * mag) / std::max(rep.value, 1e-300);
    return rep;
  }
  FluidQuadratureOptions opt;
  opt.h = grid_h > 0.0 ? grid_h : S.domain().length_scale() / 40.0;
  auto speed2 = [&](const Vec2& x) { return F.velocity(x).squaredNorm(); };
  const auto fine = FluidQuadrature::build(S.domain(), opt).integrate_with_tail(speed2);
  opt.h *= 2.0;
  const auto coarse = FluidQuadrature::build(S.domain(), opt).integrate_with_tail(speed2);
  rep.value = std::sqrt(std::max(0.0, fine.first));
  rep.tail = fine.second;
  rep.tolerance = std::abs(std::sqrt(std::max(0.0, coarse.first)) - rep.value);
  return rep;
}

VorticityMeasure read_measure_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open vorticity file " + path);
  std::vector<Atom> atoms;
  std::vector<Blob> blobs;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string t;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    if (t.empty()) continue;
    if (t.front() == '[') {
      section = t;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(t);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    try {
      if (section == "[atoms]") {
        if (f.size() != 3) throw std::invalid_argument("");
        atoms.push_back({{std::stod(f[0]), std::stod(f[1])}, std::stod(f[2])});
      } else if (section == "[blobs]") {
        if (f.size() != 4 && f.size() != 5) throw std::invalid_argument("");
        blobs.push_back({{std::stod(f[0]), std::stod(f[1])}, std::stod(f[2]), std::stod(f[3]),
                         f.size() == 5 ? profile_from_name(f[4]) : Profile::Bump});
      } else {
        throw Error(ErrorCode::ConfigError, path + ":" + std::to_string(lineno) + ": row outside [atoms]/[blobs]");
      }
    } catch (const std::invalid_argument&) {
      throw Error(ErrorCode::ConfigError, path + ":" + std::to_string(lineno) + ": malformed row");
    }
  }
  return VorticityMeasure(std::move(atoms), std::move(blobs));
}

void write_measure_csv(const std::string& path, const VorticityMeasure& w) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out.precision(17);
  out << "[atoms]\n";
  for (const auto& a : w.atoms()) out << a.pos.x() << "," << a.pos.y() << "," << a.strength << "\n";
  out << "[blobs]\n";
  for (const auto& b : w.blobs())
    out << b.center.x() << "," << b.center.y() << "," << b.strength << "," << b.radius << "," << profile_name(b.profile) << "\n";
}

namespace {
constexpr char kGridMagic[8] = {'V', 'F', 'G', 'R', 'I', 'D', '0', '1'};
}

void write_grid_binary(const std::string& path, const GridDensity& g) {
  int i0 = 0, i1 = -1, j0 = 0, j1 = -1;
  if (!g.cells.empty()) {
    i0 = i1 = g.cells[0].i;
    j0 = j1 = g.cells[0].j;
    for (const auto& c : g.cells) {
      i0 = std::min(i0, c.i);
      i1 = std::max(i1, c.i);
      j0 = std::min(j0, c.j);
      j1 = std::max(j1, c.j);
    }
  }
  const std::int32_t nx = i1 - i0 + 1, ny = j1 - j0 + 1;
  std::vector<double> val(size_t(nx) * ny, 0.0), area(size_t(nx) * ny, 0.0);
  for (const auto& c : g.cells) {
    const size_t k = size_t(c.j - j0) * nx + (c.i - i0);
    val[k] = c.value;
    area[k] = c.area;
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    const double hdr[3] = {g.origin.x(), g.origin.y(), g.h};
    const std::int32_t idx[4] = {i0, j0, nx, ny};
    out.write(kGridMagic, 8);
    out.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
    out.write(reinterpret_cast<const char*>(idx), sizeof idx);
    out.write(reinterpret_cast<const char*>(val.data()), std::streamsize(val.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(area.data()), std::streamsize(area.size() * sizeof(double)));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error(ErrorCode::IoError, "cannot rename " + tmp);
}

GridDensity read_grid_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open grid file " + path);
  char magic[8];
  double hdr[3];
  std::int32_t idx[4];
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(hdr), sizeof hdr);
  in.read(reinterpret_cast<char*>(idx), sizeof idx);
  if (!in || std::memcmp(magic, kGridMagic, 8) != 0) throw Error(ErrorCode::IoError, path + " is not a grid file");
  const std::int32_t nx = idx[2], ny = idx[3];
  if (nx < 0 || ny < 0 || !(hdr[2] > 0.0)) throw Error(ErrorCode::IoError, path + " has a corrupt header");
  std::vector<double> val(size_t(nx) * ny), area(size_t(nx) * ny);
  in.read(reinterpret_cast<char*>(val.data()), std::streamsize(val.size() * sizeof(double)));
  in.read(reinterpret_cast<char*>(area.data()), std::streamsize(area.size() * sizeof(double)));
  if (!in) throw Error(ErrorCode::IoError, path + " is truncated");
  GridDensity g;
  g.origin = Vec2(hdr[0], hdr[1]);
  g.h = hdr[2];
  for (std::int32_t j = 0; j < ny; ++j)
    for (std::int32_t i = 0; i < nx; ++i) {
      const size_t k = size_t(j) * nx + i;
      if (val[k] != 0.0 && area[k] > 0.0) g.cells.push_back({idx[0] + i, idx[1] + j, val[k], area[k]});
    }
  return g;
}

}  // namespace vflow
