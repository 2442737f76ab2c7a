#include "subriemann/structure.hpp"

#include <cmath>
#include <stdexcept>

namespace subriemann {

namespace {

constexpr double kC1Tolerance = 1e-9;
constexpr double kReebTolerance = 1e-9;

Tensor3 zero_tensor3() {
  Tensor3 t;
  for (auto& m : t) m.setZero();
  return t;
}

Tensor4 zero_tensor4() {
  Tensor4 t;
  for (auto& a : t)
    for (auto& m : a) m.setZero();
  return t;
}

// Symmetric horizontal part of D T.
Mat3 tau_from_lc(const Tensor3& LC) {
  Mat3 sigma = Mat3::Zero();
  for (int a = 0; a < 3; ++a)
    for (int c = 0; c < 3; ++c) sigma(a, c) = LC[a](2, c);
  Mat3 tau = Mat3::Zero();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) tau(a, b) = 0.5 * (sigma(a, b) + sigma(b, a));
  return tau;
}

Mat3 j_matrix(double sign) {
  Mat3 J = Mat3::Zero();
  J(0, 1) = sign;
  J(1, 0) = -sign;
  return J;
}

Tensor3 permute(const Tensor3& C, const std::array<int, 3>& P) {
  Tensor3 out = zero_tensor3();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) out[a](b, c) = C[P[a]](P[b], P[c]);
  return out;
}

void fill_connection(FrameGeometry& g, bool full) {
  g.J = j_matrix(g.sign_c1);
  g.LC = levi_civita_from_brackets(g.C);
  g.tau = tau_from_lc(g.LC);
  const Tensor3 delta = torsion_correction(g.tau, g.c1, g.sign_c1);
  for (int a = 0; a < 3; ++a) g.Gam[a] = g.LC[a] - delta[a];
  if (!full) return;
  for (int l = 0; l < 3; ++l) {
    // c1 is constant, so only the torsion part of the correction varies
    const Tensor3 dLC = levi_civita_from_brackets(g.EC[l]);
    g.dtau[l] = tau_from_lc(dLC);
    const Tensor3 dDelta = torsion_correction(g.dtau[l], 0.0, g.sign_c1);
    for (int a = 0; a < 3; ++a) g.dGam[l][a] = dLC[a] - dDelta[a];
  }
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      Mat3 r = g.dGam[b][a] - g.dGam[a][b] + g.Gam[a] * g.Gam[b] - g.Gam[b] * g.Gam[a];
      for (int k = 0; k < 3; ++k) r += g.C[a](b, k) * g.Gam[k];
      g.R[a][b] = r;
    }
}

}  // namespace

Tensor3 levi_civita_from_brackets(const Tensor3& C) {
  Tensor3 L = zero_tensor3();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) L[a](b, c) = 0.5 * (C[a](b, c) - C[b](c, a) + C[c](a, b));
  return L;
}

Tensor3 torsion_correction(const Mat3& tau, double c1, double sign_c1) {
  const Mat3 J = j_matrix(sign_c1);
  // tor[a][c](b) = g(Tor(E_a, E_c), E_b)
  auto tor = [&](int a, int c, int b) {
    double v = 0.0;
    if (a == 2) v += tau(c, b);
    if (c == 2) v -= tau(a, b);
    if (b == 2) v += c1 * J(a, c);
    return v;
  };
  Tensor3 D = zero_tensor3();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) D[a](b, c) = 0.5 * (tor(a, c, b) + tor(b, c, a) - tor(a, b, c));
  return D;
}

Mat3 FrameGeometry::tau_derivative(const Vec3& v) const {
  return v[0] * dtau[0] + v[1] * dtau[1] + v[2] * dtau[2];
}

Vec3 FrameGeometry::levi_civita(const Vec3& v, const Vec3& w, const Vec3& dw) const {
  Vec3 out = dw;
  for (int a = 0; a < 3; ++a) out += v[a] * (LC[a].transpose() * w);
  return out;
}

Vec3 FrameGeometry::nabla(const Vec3& v, const Vec3& w, const Vec3& dw) const {
  Vec3 out = dw;
  for (int a = 0; a < 3; ++a) out += v[a] * (Gam[a].transpose() * w);
  return out;
}

Vec3 FrameGeometry::bracket(const Vec3& v, const Vec3& w, const Vec3& dwv, const Vec3& dvw) const {
  Vec3 out = dwv - dvw;
  for (int a = 0; a < 3; ++a) out += v[a] * (C[a].transpose() * w);
  return out;
}

Vec3 FrameGeometry::torsion(const Vec3& u, const Vec3& v) const {
  Vec3 out = u[2] * tau_of(v) - v[2] * tau_of(u);
  out[2] += c1 * J_of(u).dot(v);
  return out;
}

Vec3 FrameGeometry::curvature(const Vec3& u, const Vec3& v, const Vec3& w) const {
  Vec3 out = Vec3::Zero();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const double uv = u[a] * v[b];
      if (uv != 0.0) out += uv * (R[a][b].transpose() * w);
    }
  return out;
}

double FrameGeometry::tau_norm() const {
  Eigen::SelfAdjointEigenSolver<Mat2> es(tau.topLeftCorner<2, 2>());
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Structure Structure::from_frame(FrameExprs rows, Box domain, std::string name) {
  Structure s;
  s.kind_ = Kind::CoordinateFrame;
  s.name_ = std::move(name);
  s.domain_ = domain;
  s.rows_ = std::move(rows);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      if (auto v = s.rows_[i][k].domain_violation(domain); !v.empty())
        throw DomainError("frame coefficient " + s.rows_[i][k].str() + ": " + v);

  auto build_derivatives = [&s] {
    for (int m = 0; m < 3; ++m)
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) s.d_rows_[m][i][k] = s.rows_[i][k].derivative(m);
    for (int m = 0; m < 3; ++m)
      for (int n = 0; n < 3; ++n)
        for (int i = 0; i < 3; ++i)
          for (int k = 0; k < 3; ++k) s.dd_rows_[m][n][i][k] = s.d_rows_[m][i][k].derivative(n);
  };
  build_derivatives();

  // sample grid: 4^3 nodes plus the centre
  std::vector<Coords> samples;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) {
        Coords p;
        const int idx[3] = {i, j, k};
        for (int d = 0; d < 3; ++d) p[d] = domain.lo[d] + (domain.hi[d] - domain.lo[d]) * (idx[d] + 0.5) / 4.0;
        samples.push_back(p);
      }
  double c1_min = 1e300, c1_max = -1e300, reeb = 0.0, min_det = 1e300;
  for (const auto& p : samples) {
    const Mat3 A = s.frame_matrix(p);
    const double det = A.determinant();
    min_det = std::min(min_det, std::abs(det));
    if (std::abs(det) < 1e-12) throw DomainError("frame is degenerate at a sampled point");
    const Tensor3 C = s.brackets_at(p);
    const double c1 = -C[0](1, 2);
    c1_min = std::min(c1_min, c1);
    c1_max = std::max(c1_max, c1);
    reeb = std::max({reeb, std::abs(C[0](2, 2)), std::abs(C[1](2, 2))});
  }
  s.validation_ = {static_cast<int>(samples.size()), c1_max - c1_min, reeb, min_det};
  if (c1_max - c1_min > kC1Tolerance * std::max(1.0, std::abs(c1_max)))
    throw DomainError("c1 = -g([X,Y],T) is not constant on the chart (spread " + std::to_string(c1_max - c1_min) + ")");
  if (reeb > kReebTolerance) throw DomainError("T is not the Reeb field: [X,T] or [Y,T] has a T component");
  const double c1 = 0.5 * (c1_min + c1_max);
  if (std::abs(c1) < 1e-12) throw DomainError("c1 vanishes: the horizontal distribution is integrable");
  if (c1 < 0.0) {
    std::swap(s.rows_[0], s.rows_[1]);
    s.swapped_ = true;
    build_derivatives();
  }
  s.c1_ = std::abs(c1);
  return s;
}

void Structure::finish_lie(const Tensor3& C) {
  kind_ = Kind::LieGroup;
  const double c1 = -C[0](1, 2);
  if (std::abs(c1) < 1e-12) throw DomainError("c1 vanishes: the horizontal distribution is integrable");
  if (std::abs(C[0](2, 2)) > kReebTolerance || std::abs(C[1](2, 2)) > kReebTolerance)
    throw DomainError("T is not the Reeb field: [X,T] or [Y,T] has a T component");
  if (c1 < 0.0) {
    constants_ = permute(C, {1, 0, 2});
    swapped_ = true;
  } else {
    constants_ = C;
  }
  c1_ = std::abs(c1);
  domain_ = Box{{-1e300, -1e300, -1e300}, {1e300, 1e300, 1e300}};
  validation_ = {1, 0.0, 0.0, 1.0};
}

Structure Structure::from_constants(const Tensor3& C, std::string name) {
  Structure s;
  s.name_ = std::move(name);
  s.finish_lie(C);
  return s;
}

Structure Structure::unimodular(double c2, double c3, std::string name) {
  Tensor3 C = zero_tensor3();
  auto set = [&C](int a, int b, int c, double v) {
    C[a](b, c) = v;
    C[b](a, c) = -v;
  };
  set(0, 1, 2, -2.0);
  set(0, 2, 1, c2);
  set(1, 2, 0, c3);
  Structure s = from_constants(C, std::move(name));
  s.unimodular_ = std::array<double, 2>{c2, c3};
  return s;
}

Structure Structure::nonunimodular(double alpha, double gamma, std::string name) {
  if (alpha == 0.0) throw std::invalid_argument("non-unimodular algebra requires alpha != 0");
  Tensor3 C = zero_tensor3();
  auto set = [&C](int a, int b, int c, double v) {
    C[a](b, c) = v;
    C[b](a, c) = -v;
  };
  set(0, 1, 1, alpha);
  set(0, 1, 2, 2.0);
  set(0, 2, 1, gamma);
  Structure s = from_constants(C, std::move(name));
  s.nonunimodular_ = std::array<double, 2>{alpha, gamma};
  return s;
}

Mat3 Structure::frame_matrix(const Coords& p) const {
  if (kind_ == Kind::LieGroup) return Mat3::Identity();
  Mat3 A;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) A(i, k) = rows_[i][k](p);
  return A;
}

Tensor3 Structure::brackets_at(const Coords& p) const {
  const Mat3 A = frame_matrix(p);
  std::array<Mat3, 3> dA;
  for (int m = 0; m < 3; ++m)
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) dA[m](i, k) = d_rows_[m][i][k](p);
  const Mat3 Ainv = A.inverse();
  Tensor3 C = zero_tensor3();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Eigen::RowVector3d br = Eigen::RowVector3d::Zero();
      for (int m = 0; m < 3; ++m) br += A(i, m) * dA[m].row(j) - A(j, m) * dA[m].row(i);
      C[i].row(j) = br * Ainv;
    }
  return C;
}

FrameGeometry Structure::at(const Coords& p, Detail detail) const {
  const bool full = detail == Detail::Full;
  FrameGeometry g;
  g.point = p;
  g.c1 = c1_;
  g.sign_c1 = 1.0;
  if (kind_ == Kind::LieGroup) {
    g.C = constants_;
    g.EC = zero_tensor4();
    for (auto& m : g.dA) m.setZero();
    fill_connection(g, full);
    return g;
  }
  if (!domain_.contains(p, 1e-12)) throw DomainError("point outside the chart domain");
  g.A = frame_matrix(p);
  g.Ainv = g.A.inverse();
  for (int m = 0; m < 3; ++m)
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) g.dA[m](i, k) = d_rows_[m][i][k](p);
  if (!full) {
    g.C = zero_tensor3();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Eigen::RowVector3d br = Eigen::RowVector3d::Zero();
        for (int m = 0; m < 3; ++m) br += g.A(i, m) * g.dA[m].row(j) - g.A(j, m) * g.dA[m].row(i);
        g.C[i].row(j) = br * g.Ainv;
      }
    fill_connection(g, false);
    return g;
  }
  std::array<std::array<Mat3, 3>, 3> ddA;
  for (int m = 0; m < 3; ++m)
    for (int n = m; n < 3; ++n) {
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) ddA[m][n](i, k) = dd_rows_[m][n][i][k](p);
      ddA[n][m] = ddA[m][n];
    }

  std::array<Mat3, 3> dAinv;
  for (int n = 0; n < 3; ++n) dAinv[n] = -g.Ainv * g.dA[n] * g.Ainv;

  // coordinate brackets and their coordinate derivatives
  std::array<std::array<Eigen::RowVector3d, 3>, 3> br;
  std::array<std::array<std::array<Eigen::RowVector3d, 3>, 3>, 3> dbr;  // [n][i][j]
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      br[i][j].setZero();
      for (int m = 0; m < 3; ++m) br[i][j] += g.A(i, m) * g.dA[m].row(j) - g.A(j, m) * g.dA[m].row(i);
      for (int n = 0; n < 3; ++n) {
        Eigen::RowVector3d d = Eigen::RowVector3d::Zero();
        for (int m = 0; m < 3; ++m)
          d += g.dA[n](i, m) * g.dA[m].row(j) + g.A(i, m) * ddA[n][m].row(j) - g.dA[n](j, m) * g.dA[m].row(i) -
               g.A(j, m) * ddA[n][m].row(i);
        dbr[n][i][j] = d;
      }
    }
  g.C = zero_tensor3();
  std::array<Tensor3, 3> dC;  // coordinate derivatives
  for (int n = 0; n < 3; ++n) dC[n] = zero_tensor3();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      g.C[i].row(j) = br[i][j] * g.Ainv;
      for (int n = 0; n < 3; ++n) dC[n][i].row(j) = dbr[n][i][j] * g.Ainv + br[i][j] * dAinv[n];
    }
  g.EC = zero_tensor4();
  for (int l = 0; l < 3; ++l)
    for (int i = 0; i < 3; ++i)
      for (int n = 0; n < 3; ++n) g.EC[l][i] += g.A(l, n) * dC[n][i];
  fill_connection(g, true);
  return g;
}

double webster_unimodular(double c2, double c3) {
  const double c1 = -2.0;
  return c1 * (c3 - c2) / 2.0;
}

double tau_norm_unimodular(double c2, double c3) { return std::abs(c2 + c3) / 2.0; }

double webster_nonunimodular(double alpha, double gamma) { return -alpha * alpha - gamma; }

Mat2 torsion_in_rotated_frame(double c2, double c3, double a1, double a2) {
  if (std::abs(a1 * a1 + a2 * a2 - 1.0) > 1e-12)
    throw std::invalid_argument("rotation coefficients must satisfy a1^2 + a2^2 = 1");
  const double k = c2 + c3;
  Mat2 m;
  m << k * a1 * a2, 0.5 * k * (a1 * a1 - a2 * a2), 0.5 * k * (a1 * a1 - a2 * a2), -k * a1 * a2;
  return m;
}

}  // namespace subriemann
