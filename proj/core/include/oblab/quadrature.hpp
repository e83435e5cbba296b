#pragma once

#include <Eigen/Core>

#include "oblab/util.hpp"

namespace oblab {

/// Quadrature on the unit sphere. In 2D: equispaced angles with trapezoid
/// weights (spectrally accurate for periodic integrands, weights sum to 2*pi
/// exactly). In 3D: Gauss-Legendre in the polar cosine times equispaced
/// longitude (weights sum to 4*pi to round-off).
struct SphereQuad {
  Mat nodes;    // one unit vector per row
  Vec weights;
  int count() const { return static_cast<int>(weights.size()); }
};

SphereQuad sphere_quadrature(int dim, int n_theta);

/// Product quadrature on the unit ball: Gauss-Legendre radial nodes on (0,1)
/// against a SphereQuad, with the polar Jacobian rho^(dim-1) folded into the
/// weights. Node (a,b) sits at rho[a] * sphere_node[b]; the flat index is
/// a * sphere.count() + b. Weights sum to the ball volume exactly in 2D.
struct BallQuad {
  Vec rho;       // radial nodes
  Vec rho_w;     // radial Gauss weights (without Jacobian)
  SphereQuad sphere;

  int count() const { return static_cast<int>(rho.size()) * sphere.count(); }
  Vec node(int a, int b) const { return rho[a] * sphere.nodes.row(b).transpose(); }
  double weight(int a, int b) const {
    return rho_w[a] * std::pow(rho[a], sphere.nodes.cols() - 1) * sphere.weights[b];
  }
};

BallQuad ball_quadrature(int dim, int n_rho, int n_theta);

/// Gauss-Legendre rule on [a, b].
void gauss_legendre(int n, double a, double b, Vec& nodes, Vec& weights);

struct QuadSpec {
  int n_theta = 512;
  int n_rho = 64;
};

}  // namespace oblab
