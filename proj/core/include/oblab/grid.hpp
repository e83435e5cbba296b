#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "oblab/util.hpp"

namespace oblab {

/// Uniform tensor grid on an axis-aligned box. Nodes include the boundary;
/// spacing h is identical along every axis. Node (i,j) sits at
/// lo + h*(i,j); linear index is x-fastest: id = j*nx + i.
struct Grid {
  Box box;
  double h = 0.0;
  std::array<int, 2> shape = {0, 0};  // node counts per axis

  int nx() const { return shape[0]; }
  int ny() const { return shape[1]; }
  std::size_t size() const { return static_cast<std::size_t>(nx()) * ny(); }

  std::size_t id(int i, int j) const { return static_cast<std::size_t>(j) * nx() + i; }
  std::array<int, 2> ij(std::size_t id) const {
    return {static_cast<int>(id % nx()), static_cast<int>(id / nx())};
  }

  Vec node(int i, int j) const {
    Vec x(2);
    x[0] = box.lo[0] + h * i;
    x[1] = box.lo[1] + h * j;
    return x;
  }

  bool is_boundary(int i, int j) const {
    return i == 0 || j == 0 || i == nx() - 1 || j == ny() - 1;
  }

  /// Builds a grid covering box with spacing h. h must divide both side
  /// lengths evenly (to 1e-9 relative), otherwise ValidationError.
  static Grid make(const Box& box, double h);
};

/// Scalar field on the nodes of a Grid.
struct GridField {
  Grid grid;
  std::vector<double> v;

  double& at(int i, int j) { return v[grid.id(i, j)]; }
  double at(int i, int j) const { return v[grid.id(i, j)]; }

  static GridField zeros(const Grid& g) { return {g, std::vector<double>(g.size(), 0.0)}; }
  static GridField sample(const Grid& g, const std::function<double(const Vec&)>& f);
};

/// Bilinear interpolation of a GridField. Evaluation outside the box (beyond
/// a half-cell slack) throws DomainError.
double interp_bilinear(const GridField& f, const Vec& x);

/// Central-difference gradient components on nodes (one-sided at the box
/// boundary). Returned in the same node ordering as the input field.
std::array<GridField, 2> gradient_fields(const GridField& u);

}  // namespace oblab
