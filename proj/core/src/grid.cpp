#include "oblab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace oblab {

Grid Grid::make(const Box& box, double h) {
  if (box.dim() != 2) throw ValidationError("grid: only 2D boxes are supported");
  if (!(h > 0)) throw ValidationError("grid: spacing must be positive");
  Grid g;
  g.box = box;
  g.h = h;
  for (int d = 0; d < 2; ++d) {
    double len = box.hi[d] - box.lo[d];
    if (!(len > 0)) throw ValidationError("grid: box has non-positive extent");
    double cells = len / h;
    double rounded = std::round(cells);
    if (std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells) || rounded < 2) {
      std::ostringstream os;
      os << "grid: h = " << h << " does not evenly divide side " << d << " of length " << len;
      throw ValidationError(os.str());
    }
    g.shape[d] = static_cast<int>(rounded) + 1;
  }
  return g;
}

GridField GridField::sample(const Grid& g, const std::function<double(const Vec&)>& f) {
  GridField out = GridField::zeros(g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) out.at(i, j) = f(g.node(i, j));
  return out;
}

double interp_bilinear(const GridField& f, const Vec& x) {
  const Grid& g = f.grid;
  const double hx = g.h;
  double sx = (x[0] - g.box.lo[0]) / hx;
  double sy = (x[1] - g.box.lo[1]) / hx;
  const double slack = 0.5;
  if (sx < -slack || sy < -slack || sx > g.nx() - 1 + slack || sy > g.ny() - 1 + slack)
    throw DomainError("interpolation point outside the grid");
  int i = std::clamp(static_cast<int>(std::floor(sx)), 0, g.nx() - 2);
  int j = std::clamp(static_cast<int>(std::floor(sy)), 0, g.ny() - 2);
  double tx = sx - i, ty = sy - j;
  double v00 = f.at(i, j), v10 = f.at(i + 1, j);
  double v01 = f.at(i, j + 1), v11 = f.at(i + 1, j + 1);
  return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 + (1 - tx) * ty * v01 + tx * ty * v11;
}

std::array<GridField, 2> gradient_fields(const GridField& u) {
  const Grid& g = u.grid;
  GridField gx = GridField::zeros(g), gy = GridField::zeros(g);
  const double h = g.h;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (i == 0)
        gx.at(i, j) = (u.at(1, j) - u.at(0, j)) / h;
      else if (i == g.nx() - 1)
        gx.at(i, j) = (u.at(i, j) - u.at(i - 1, j)) / h;
      else
        gx.at(i, j) = (u.at(i + 1, j) - u.at(i - 1, j)) / (2 * h);
      if (j == 0)
        gy.at(i, j) = (u.at(i, 1) - u.at(i, 0)) / h;
      else if (j == g.ny() - 1)
        gy.at(i, j) = (u.at(i, j) - u.at(i, j - 1)) / h;
      else
        gy.at(i, j) = (u.at(i, j + 1) - u.at(i, j - 1)) / (2 * h);
    }
  }
  return {gx, gy};
}

}  // namespace oblab
