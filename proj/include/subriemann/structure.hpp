// Pseudo-hermitian structures on three-manifolds given by an orthonormal
// frame {X, Y, T}: brackets, c1, J, torsion, connections and curvature.
//
// Frame indices: 0 = X, 1 = Y, 2 = T. Vectors are frame components unless
// the name says otherwise. Internally c1 = -g([X,Y], T) is kept positive:
// inputs with c1 < 0 have X and Y exchanged on construction.
#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>

#include "subriemann/expr.hpp"

namespace subriemann {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat2 = Eigen::Matrix2d;

// T[a](b, c): component c of an object indexed by frame vectors a, b.
using Tensor3 = std::array<Mat3, 3>;
using Tensor4 = std::array<Tensor3, 3>;

inline Coords to_coords(const Vec3& v) { return {v[0], v[1], v[2]}; }
inline Vec3 to_vec(const Coords& p) { return {p[0], p[1], p[2]}; }

struct TangentVector {
  Coords point{};
  Vec3 comp = Vec3::Zero();  // a X + b Y + c T

  bool horizontal(double tol = 0.0) const { return std::abs(comp[2]) <= tol; }
  double norm() const { return comp.norm(); }
};

// Levi-Civita coefficients of an orthonormal frame from its bracket table.
Tensor3 levi_civita_from_brackets(const Tensor3& C);
// Difference tensor between Levi-Civita and the pseudo-hermitian connection.
Tensor3 torsion_correction(const Mat3& tau, double c1, double sign_c1);

// All frame-level geometry at one point.
struct FrameGeometry {
  Coords point{};
  double c1 = 0.0;
  double sign_c1 = 1.0;
  Mat3 A = Mat3::Identity();  // rows: X, Y, T in chart coordinates
  Mat3 Ainv = Mat3::Identity();
  std::array<Mat3, 3> dA{};  // dA[m](i, k) = d/dx_m of A(i, k)
  Tensor3 C{};               // [E_a, E_b] = C[a](b, c) E_c
  Tensor4 EC{};              // EC[l][a](b, c) = E_l(C[a](b, c))
  Tensor3 LC{};              // D_{E_a} E_b = LC[a](b, c) E_c
  Tensor3 Gam{};             // nabla_{E_a} E_b = Gam[a](b, c) E_c
  Tensor4 dGam{};            // dGam[l] = E_l(Gam)
  Mat3 tau = Mat3::Zero();   // tau(a, b) = g(tau(E_a), E_b)
  std::array<Mat3, 3> dtau{};
  Mat3 J = Mat3::Zero();     // J(E_a) = sum_b J(a, b) E_b
  Tensor4 R{};               // R(E_a, E_b) E_c = R[a][b](c, e) E_e

  Vec3 frame_of(const Vec3& coord_vec) const { return Ainv.transpose() * coord_vec; }
  Vec3 coords_of(const Vec3& frame_vec) const { return A.transpose() * frame_vec; }

  Vec3 J_of(const Vec3& v) const { return J.transpose() * v; }
  Vec3 tau_of(const Vec3& v) const { return tau * v; }
  double tau_form(const Vec3& u, const Vec3& v) const { return u.dot(tau * v); }
  // derivative of tau along the frame vector v
  Mat3 tau_derivative(const Vec3& v) const;

  // D_V W and nabla_V W for W with frame components w whose derivative
  // along V is dw.
  Vec3 levi_civita(const Vec3& v, const Vec3& w, const Vec3& dw = Vec3::Zero()) const;
  Vec3 nabla(const Vec3& v, const Vec3& w, const Vec3& dw = Vec3::Zero()) const;
  // [V, W] where dvw = W(V components) and dwv = V(W components)
  Vec3 bracket(const Vec3& v, const Vec3& w, const Vec3& dwv = Vec3::Zero(),
               const Vec3& dvw = Vec3::Zero()) const;
  // Tor(U, V) from the defining formula
  Vec3 torsion(const Vec3& u, const Vec3& v) const;
  Vec3 curvature(const Vec3& u, const Vec3& v, const Vec3& w) const;
  double webster() const { return -R[0][1](1, 0); }
  double tau_norm() const;  // operator norm on the horizontal plane
};

class Structure {
 public:
  enum class Kind { CoordinateFrame, LieGroup };
  using FrameExprs = std::array<std::array<ExprFn, 3>, 3>;  // rows X, Y, T

  struct Validation {
    int samples = 0;
    double c1_spread = 0.0;
    double reeb_residual = 0.0;
    double min_abs_det = 0.0;
  };

  // Frame fields as coefficient expressions in chart coordinates.
  static Structure from_frame(FrameExprs rows, Box domain, std::string name = {});
  // [X,Y] = -2T, [X,T] = c2 Y, [Y,T] = c3 X.
  static Structure unimodular(double c2, double c3, std::string name = {});
  // [X,Y] = alpha Y + 2T, [X,T] = gamma Y, [Y,T] = 0.
  static Structure nonunimodular(double alpha, double gamma, std::string name = {});
  // Constant structure constants [E_a, E_b] = C[a](b, c) E_c.
  static Structure from_constants(const Tensor3& C, std::string name = {});

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const Box& domain() const { return domain_; }
  double c1() const { return c1_; }
  bool swapped_xy() const { return swapped_; }
  const Validation& validation() const { return validation_; }
  const FrameExprs& frame() const { return rows_; }
  const Tensor3& constants() const { return constants_; }
  std::optional<std::array<double, 2>> unimodular_constants() const { return unimodular_; }
  std::optional<std::array<double, 2>> nonunimodular_constants() const { return nonunimodular_; }

  // Connection level skips the second derivatives: no E_l(C), dGam, dtau or R.
  enum class Detail { Connection, Full };
  FrameGeometry at(const Coords& p, Detail detail = Detail::Full) const;
  // Chart matrix only (rows X, Y, T), for cheap vector-field evaluation.
  Mat3 frame_matrix(const Coords& p) const;

 private:
  Structure() = default;
  void finish_lie(const Tensor3& C);
  Tensor3 brackets_at(const Coords& p) const;

  Kind kind_ = Kind::CoordinateFrame;
  std::string name_;
  Box domain_;
  double c1_ = 0.0;
  bool swapped_ = false;
  Validation validation_;
  FrameExprs rows_;
  std::array<std::array<std::array<ExprFn, 3>, 3>, 3> d_rows_;                 // [m][i][k]
  std::array<std::array<std::array<std::array<ExprFn, 3>, 3>, 3>, 3> dd_rows_;  // [m][n][i][k]
  Tensor3 constants_{};
  std::optional<std::array<double, 2>> unimodular_;
  std::optional<std::array<double, 2>> nonunimodular_;
};

// Closed forms for left-invariant structures, in the [X,Y] = -2T normalization.
double webster_unimodular(double c2, double c3);
double tau_norm_unimodular(double c2, double c3);
double webster_nonunimodular(double alpha, double gamma);

// Torsion matrix of the unimodular algebra in the rotated frame
// (a1 X + a2 Y, -a2 X + a1 Y); (a1, a2) must be a unit vector.
Mat2 torsion_in_rotated_frame(double c2, double c3, double a1, double a2);

}  // namespace subriemann
