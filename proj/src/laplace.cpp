#include "vortexflow/laplace.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "vortexflow/errors.hpp"

namespace vflow {

namespace {
constexpr cplx I{0.0, 1.0};
// Targets within this many max-speed units / n of a curve use close evaluation.
constexpr double kCloseFactor = 36.0;
}  // namespace

std::vector<double> periodic_derivative(const std::vector<double>& f) {
  const int n = int(f.size());
  Eigen::FFT<double> fft;
  std::vector<cplx> spec;
  fft.fwd(spec, f);
  for (int k = 0; k < n; ++k) {
    int kk = k <= n / 2 ? k : k - n;
    if (2 * k == n) kk = 0;
    spec[k] *= cplx(0.0, double(kk));
  }
  std::vector<cplx> out;
  fft.inv(out, spec);
  std::vector<double> d(n);
  for (int k = 0; k < n; ++k) d[k] = out[k].real();
  return d;
}

namespace detail {

struct LaplaceCore {
  std::vector<Curve> curves;
  std::vector<cplx> holes;
  int n = 0;
  int m = 0;
  double h = 0.0;
  std::vector<std::vector<CurvePoint>> nodes;
  std::vector<double> speed, length, scale;
  Eigen::MatrixXd lu;
  Eigen::VectorXi perm;
  double irc = 0.0;

  mutable std::mutex mu;
  mutable std::map<std::pair<int, int>, std::shared_ptr<const std::vector<CurvePoint>>> fine;

  double side(int c) const { return c == 0 ? 1.0 : -1.0; }
  int size() const { return m * n + (m - 1); }

  void init_geometry() {
    m = int(curves.size());
    h = two_pi / n;
    for (const auto& c : curves) {
      nodes.push_back(c.sample(n));
      double s = 0.0, l = 0.0;
      for (const auto& p : nodes.back()) {
        s = std::max(s, std::abs(p.dz));
        l += std::abs(p.dz) * h;
      }
      speed.push_back(s);
      length.push_back(l);
      scale.push_back(l / two_pi);
    }
  }

  std::shared_ptr<const std::vector<CurvePoint>> fine_nodes(int c, int M) const {
    if (M == n) return std::shared_ptr<const std::vector<CurvePoint>>(std::shared_ptr<void>(), &nodes[c]);
    std::lock_guard<std::mutex> lk(mu);
    auto& slot = fine[{c, M}];
    if (!slot) slot = std::make_shared<const std::vector<CurvePoint>>(curves[c].sample(M));
    return slot;
  }

  int fine_count(int c, double d) const {
    int M = n;
    const double need = d > 0.0 ? kCloseFactor * speed[c] / d : std::numeric_limits<double>::infinity();
    while (M < need && M < LaplaceSolver::kMaxFine) M *= 2;
    return M;
  }

  double node_distance(int c, cplx z, int* jmin = nullptr) const {
    double best = std::numeric_limits<double>::infinity();
    int jb = 0;
    for (int j = 0; j < n; ++j) {
      const double d = std::abs(nodes[c][j].z - z);
      if (d < best) {
        best = d;
        jb = j;
      }
    }
    if (jmin) *jmin = jb;
    return best;
  }

  double curve_distance(int c, cplx z) const {
    int j0 = 0;
    double best = node_distance(c, z, &j0);
    for (int start : {j0 - 1, j0, j0 + 1}) {
      double t = h * start;
      CurvePoint p = curves[c].eval(t);
      for (int it = 0; it < 40; ++it) {
        const cplx r = p.z - z;
        const double f = (r * std::conj(p.dz)).real();
        double fp = std::norm(p.dz) + (r * std::conj(p.d2z)).real();
        if (fp <= 0.0) fp = std::norm(p.dz);
        const double step = std::clamp(-f / fp, -h, h);
        t += step;
        p = curves[c].eval(t);
        if (std::abs(step) < 1e-15) break;
      }
      best = std::min(best, std::abs(p.z - z));
    }
    return best;
  }

  Eigen::VectorXd lu_solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd pb(b.size());
    for (int i = 0; i < b.size(); ++i) pb(i) = b(perm(i));
    Eigen::VectorXd y = lu.triangularView<Eigen::UnitLower>().solve(pb);
    return lu.triangularView<Eigen::Upper>().solve(y);
  }

  Eigen::MatrixXd assemble() const {
    const int N = size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
    for (int c = 0; c < m; ++c)
      for (int i = 0; i < n; ++i) {
        const int row = c * n + i;
        const cplx zi = nodes[c][i].z;
        for (int cc = 0; cc < m; ++cc)
          for (int j = 0; j < n; ++j) {
            const auto& pj = nodes[cc][j];
            double k;
            if (cc == c && j == i)
              k = (pj.d2z / pj.dz).imag() * h / (2.0 * two_pi);
            else
              k = (pj.dz * h / (pj.z - zi)).imag() / two_pi;
            A(row, cc * n + j) = k;
          }
        A(row, row) += 0.5 * side(c);
        for (int k = 1; k < m; ++k) A(row, m * n + k - 1) = std::log(std::abs(zi - holes[k - 1]));
      }
    for (int k = 1; k < m; ++k)
      for (int j = 0; j < n; ++j) A(m * n + k - 1, k * n + j) = std::abs(nodes[k][j].dz) * h / length[k];
    return A;
  }
};

struct HarmonicState {
  std::shared_ptr<const LaplaceCore> core;
  std::function<double(cplx)> data;
  std::vector<char> split;
  std::vector<double> dsrc;
  std::vector<std::vector<double>> r;
  std::vector<double> a;

  mutable std::mutex mu;
  mutable std::vector<std::shared_ptr<const std::pair<std::vector<cplx>, std::vector<cplx>>>> close;
  mutable std::map<std::pair<int, int>, std::shared_ptr<const std::vector<double>>> fine_g;

  std::shared_ptr<const std::vector<double>> fine_data(int c, int M) const {
    {
      std::lock_guard<std::mutex> lk(mu);
      auto it = fine_g.find({c, M});
      if (it != fine_g.end()) return it->second;
    }
    auto pts = core->fine_nodes(c, M);
    auto v = std::make_shared<std::vector<double>>(M);
    for (int f = 0; f < M; ++f) (*v)[f] = data((*pts)[f].z);
    std::lock_guard<std::mutex> lk(mu);
    auto& slot = fine_g[{c, M}];
    if (!slot) slot = v;
    return slot;
  }

  // Boundary values of the Cauchy integral of r_c on the side facing the fluid,
  // and their parameter derivative.
  std::shared_ptr<const std::pair<std::vector<cplx>, std::vector<cplx>>> close_values(int c) const {
    {
      std::lock_guard<std::mutex> lk(mu);
      if (close[c]) return close[c];
    }
    const auto& nd = core->nodes[c];
    const int n = core->n;
    const double h = core->h;
    const auto& f = r[c];
    const auto fp = periodic_derivative(f);
    auto out = std::make_shared<std::pair<std::vector<cplx>, std::vector<cplx>>>();
    auto& B = out->first;
    B.resize(n);
    for (int j = 0; j < n; ++j) {
      cplx q = fp[j] * h;
      for (int i = 0; i < n; ++i)
        if (i != j) q += (f[i] - f[j]) * nd[i].dz * h / (nd[i].z - nd[j].z);
      q /= (two_pi * I);
      B[j] = c == 0 ? f[j] + q : q;
    }
    std::vector<double> re(n), im(n);
    for (int j = 0; j < n; ++j) {
      re[j] = B[j].real();
      im[j] = B[j].imag();
    }
    const auto dre = periodic_derivative(re), dim = periodic_derivative(im);
    out->second.resize(n);
    for (int j = 0; j < n; ++j) out->second[j] = cplx(dre[j], dim[j]);
    std::lock_guard<std::mutex> lk(mu);
    if (!close[c]) close[c] = out;
    return close[c];
  }

  // Cauchy integral of curve c's smooth density and its z-derivative.
  std::pair<cplx, cplx> smooth_part(int c, cplx z, double node_dist, int jnear) const {
    const auto& nd = core->nodes[c];
    const int n = core->n;
    const double h = core->h;
    if (node_dist > kCloseFactor * core->speed[c] / n) {
      cplx F = 0.0, Fp = 0.0;
      for (int j = 0; j < n; ++j) {
        const cplx w = r[c][j] * nd[j].dz * h / (two_pi * I);
        const cplx d = 1.0 / (nd[j].z - z);
        F += w * d;
        Fp += w * d * d;
      }
      return {F, Fp};
    }
    const auto cv = close_values(c);
    const auto& B = cv->first;
    if (node_dist <= 1e-14 * core->scale[c]) return {B[jnear], cv->second[jnear] / nd[jnear].dz};
    if (c == 0) {
      cplx num = 0.0, den = 0.0;
      for (int j = 0; j < n; ++j) {
        const cplx wj = nd[j].dz * h / (nd[j].z - z);
        num += B[j] * wj;
        den += wj;
      }
      const cplx F = num / den;
      cplx dn = 0.0;
      for (int j = 0; j < n; ++j) dn += (B[j] - F) * nd[j].dz * h / ((nd[j].z - z) * (nd[j].z - z));
      return {F, dn / den};
    }
    const cplx a0 = core->holes[c - 1];
    const cplx w = 1.0 / (z - a0);
    cplx num = 0.0, den = 0.0;
    thread_local std::vector<cplx> wn, W;
    wn.resize(n);
    W.resize(n);
    for (int j = 0; j < n; ++j) {
      wn[j] = 1.0 / (nd[j].z - a0);
      W[j] = -nd[j].dz * wn[j] * wn[j] * h;
      const cplx t = W[j] / (wn[j] - w);
      num += B[j] * t;
      den += t;
    }
    const cplx G = num / den;
    cplx dn = 0.0;
    for (int j = 0; j < n; ++j) dn += (B[j] - G) * W[j] / ((wn[j] - w) * (wn[j] - w));
    return {G, (dn / den) * (-w * w)};
  }

  std::pair<cplx, cplx> rough_part(int c, cplx z, double dist) const {
    const double d = std::min(dsrc[c], dist);
    const int M = core->fine_count(c, d);
    const auto pts = core->fine_nodes(c, M);
    const auto g = fine_data(c, M);
    const double hM = two_pi / M;
    const double s2 = 2.0 * core->side(c);
    cplx F = 0.0, Fp = 0.0;
    for (int f = 0; f < M; ++f) {
      const auto& p = (*pts)[f];
      const cplx w = s2 * (*g)[f] * p.dz * hM / (two_pi * I);
      const cplx q = 1.0 / (p.z - z);
      F += w * q;
      Fp += w * q * q;
    }
    return {F, Fp};
  }

  // Returns (u, grad u) or signals an on-curve hit through on_curve.
  void evaluate(cplx z, bool want_grad, double& u, cplx& grad) const {
    const int m = core->m;
    cplx F = 0.0, Fp = 0.0;
    for (int c = 0; c < m; ++c) {
      int jn = 0;
      const double dn = core->node_distance(c, z, &jn);
      const bool near = dn <= kCloseFactor * core->speed[c] / core->n;
      double dist = dn;
      if (near) dist = core->curve_distance(c, z);
      const bool on_curve = dist <= 1e-13 * core->scale[c];
      if (on_curve && !want_grad) {
        u = data(z);
        return;
      }
      if (on_curve && split[c])
        throw Error(ErrorCode::ResolutionTooLow, "gradient on a curve carrying unresolved boundary data");
      auto sp = smooth_part(c, z, dn, jn);
      F += sp.first;
      Fp += sp.second;
      if (split[c]) {
        auto rp = rough_part(c, z, dist);
        F += rp.first;
        Fp += rp.second;
      }
    }
    u = F.real();
    grad = std::conj(Fp);
    for (int k = 1; k < m; ++k) {
      const cplx d = z - core->holes[k - 1];
      u += a[k - 1] * std::log(std::abs(d));
      grad += a[k - 1] / std::conj(d);
    }
  }
};

}  // namespace detail

double HarmonicFunction::value(cplx z) const {
  double u = 0.0;
  cplx g;
  s_->evaluate(z, false, u, g);
  return u;
}

cplx HarmonicFunction::gradient(cplx z) const {
  double u = 0.0;
  cplx g;
  s_->evaluate(z, true, u, g);
  return g;
}

double HarmonicFunction::log_coefficient(int hole) const { return s_->a.at(hole - 1); }

bool HarmonicFunction::split() const {
  for (char c : s_->split)
    if (c) return true;
  return false;
}

LaplaceSolver::LaplaceSolver(std::vector<Curve> curves, std::vector<cplx> hole_points, int n) {
  if (n < 16 || n % 2) throw Error(ErrorCode::ResolutionTooLow, "need an even node count >= 16 per curve");
  if (hole_points.size() + 1 != curves.size()) throw Error(ErrorCode::InvalidArgument, "one interior point per hole required");
  auto core = std::make_shared<detail::LaplaceCore>();
  core->curves = std::move(curves);
  core->holes = std::move(hole_points);
  core->n = n;
  core->init_geometry();
  Eigen::PartialPivLU<Eigen::MatrixXd> plu(core->assemble());
  core->irc = 1.0 / plu.rcond();
  if (!(core->irc <= kIllConditioned))
    throw Error(ErrorCode::IllConditionedSystem, "boundary system condition estimate " + std::to_string(core->irc));
  core->lu = plu.matrixLU();
  core->perm = plu.permutationP().indices();
  // P A = L U with P given as "row i of PA is row perm^{-1}(i)"; store the gather form.
  Eigen::VectorXi gather(core->perm.size());
  for (int i = 0; i < core->perm.size(); ++i) gather(core->perm(i)) = i;
  core->perm = gather;
  core_ = core;
}

LaplaceSolver LaplaceSolver::from_factors(std::vector<Curve> curves, std::vector<cplx> hole_points, int n,
                                          Eigen::MatrixXd lu, Eigen::VectorXi perm, double inverse_rcond) {
  auto core = std::make_shared<detail::LaplaceCore>();
  core->curves = std::move(curves);
  core->holes = std::move(hole_points);
  core->n = n;
  core->init_geometry();
  if (lu.rows() != core->size() || perm.size() != core->size())
    throw Error(ErrorCode::IoError, "cached factors do not match the geometry");
  core->lu = std::move(lu);
  core->perm = std::move(perm);
  core->irc = inverse_rcond;
  LaplaceSolver s;
  s.core_ = core;
  return s;
}

HarmonicFunction LaplaceSolver::solve(const BoundaryData& data) const {
  const auto& C = *core_;
  const int m = C.m, n = C.n;
  auto st = std::make_shared<detail::HarmonicState>();
  st->core = core_;
  st->data = data.value;
  st->split.assign(m, 0);
  st->dsrc.assign(m, std::numeric_limits<double>::infinity());
  st->close.resize(m);
  for (int c = 0; c < m && c < int(data.singular_distance.size()); ++c) {
    st->dsrc[c] = data.singular_distance[c];
    st->split[c] = st->dsrc[c] < kCloseFactor * C.speed[c] / n;
  }

  Eigen::VectorXd b = Eigen::VectorXd::Zero(C.size());
  for (int c = 0; c < m; ++c)
    if (!st->split[c])
      for (int i = 0; i < n; ++i) b(c * n + i) = data.value(C.nodes[c][i].z);

  for (int cs = 0; cs < m; ++cs) {
    if (!st->split[cs]) continue;
    const int M = C.fine_count(cs, st->dsrc[cs]);
    const int stride = M / n;
    const auto pts = C.fine_nodes(cs, M);
    const auto g = st->fine_data(cs, M);
    const double hM = two_pi / M;
    const double s2 = 2.0 * C.side(cs);
    for (int c = 0; c < m; ++c)
      for (int i = 0; i < n; ++i) {
        const cplx zi = C.nodes[c][i].z;
        double acc = 0.0;
        for (int f = 0; f < M; ++f) {
          const auto& p = (*pts)[f];
          double k;
          if (c == cs && f == i * stride)
            k = (p.d2z / p.dz).imag() * hM / (2.0 * two_pi);
          else
            k = (p.dz * hM / (p.z - zi)).imag() / two_pi;
          acc += k * (*g)[f];
        }
        b(c * n + i) -= s2 * acc;
      }
    if (cs > 0) {
      double ig = 0.0;
      for (int f = 0; f < M; ++f) ig += (*g)[f] * std::abs((*pts)[f].dz) * hM;
      b(m * n + cs - 1) = -s2 * ig / C.length[cs];
    }
  }

  const Eigen::VectorXd x = C.lu_solve(b);
  st->r.resize(m);
  for (int c = 0; c < m; ++c) st->r[c].assign(x.data() + c * n, x.data() + (c + 1) * n);
  st->a.assign(x.data() + m * n, x.data() + x.size());
  HarmonicFunction hf;
  hf.s_ = st;
  return hf;
}

int LaplaceSolver::nodes_per_curve() const { return core_->n; }
int LaplaceSolver::curve_count() const { return core_->m; }
double LaplaceSolver::inverse_rcond() const { return core_->irc; }
double LaplaceSolver::distance_to_curve(int c, cplx z) const { return core_->curve_distance(c, z); }
const Eigen::MatrixXd& LaplaceSolver::lu() const { return core_->lu; }
const Eigen::VectorXi& LaplaceSolver::permutation() const { return core_->perm; }

}  // namespace vflow
