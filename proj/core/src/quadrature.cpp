#include "oblab/quadrature.hpp"

#include <cmath>

namespace oblab {

void gauss_legendre(int n, double a, double b, Vec& nodes, Vec& weights) {
  if (n < 1) throw ValidationError("gauss_legendre: need at least one node");
  nodes.resize(n);
  weights.resize(n);
  // Newton on the Legendre polynomial from the Chebyshev initial guess;
  // standard and accurate to round-off for the sizes used here.
  int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double xm = 0.5 * (b + a), xl = 0.5 * (b - a);
    nodes[i] = xm - xl * x;
    nodes[n - 1 - i] = xm + xl * x;
    weights[i] = 2.0 * xl / ((1.0 - x * x) * pp * pp);
    weights[n - 1 - i] = weights[i];
  }
}

SphereQuad sphere_quadrature(int dim, int n_theta) {
  if (n_theta < 4) throw ValidationError("sphere_quadrature: too few angular nodes");
  SphereQuad q;
  if (dim == 2) {
    q.nodes.resize(n_theta, 2);
    q.weights.resize(n_theta);
    double w = 2.0 * M_PI / n_theta;
    for (int k = 0; k < n_theta; ++k) {
      double th = 2.0 * M_PI * k / n_theta;
      q.nodes(k, 0) = std::cos(th);
      q.nodes(k, 1) = std::sin(th);
      q.weights[k] = w;
    }
  } else if (dim == 3) {
    // Gauss-Legendre in the polar cosine keeps the weight sum at 4 pi to
    // round-off, which a plain latitude trapezoid does not.
    int n_lat = n_theta / 2;
    Vec mu, mw;
    gauss_legendre(n_lat, -1.0, 1.0, mu, mw);
    q.nodes.resize(n_lat * n_theta, 3);
    q.weights.resize(n_lat * n_theta);
    double wl = 2.0 * M_PI / n_theta;
    int idx = 0;
    for (int a = 0; a < n_lat; ++a) {
      double z = mu[a], rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      for (int k = 0; k < n_theta; ++k, ++idx) {
        double th = 2.0 * M_PI * k / n_theta;
        q.nodes(idx, 0) = rho * std::cos(th);
        q.nodes(idx, 1) = rho * std::sin(th);
        q.nodes(idx, 2) = z;
        q.weights[idx] = mw[a] * wl;
      }
    }
  } else {
    throw ValidationError("sphere_quadrature: dim must be 2 or 3");
  }
  return q;
}

BallQuad ball_quadrature(int dim, int n_rho, int n_theta) {
  if (n_rho < 2) throw ValidationError("ball_quadrature: too few radial nodes");
  BallQuad q;
  gauss_legendre(n_rho, 0.0, 1.0, q.rho, q.rho_w);
  q.sphere = sphere_quadrature(dim, n_theta);
  return q;
}

}  // namespace oblab
