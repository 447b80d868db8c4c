#pragma once

#include <functional>

#include "afem/polynomial.hpp"
#include "afem/splines.hpp"

namespace afem {

/// A function that is smooth on every cell of some partition, evaluated with
/// one-sided derivatives taken from the given cell.
using Field = std::function<double(const Cell& cell, Point x, MultiIndex d)>;

/// Closed-form function given by its partial derivatives.
using Analytic = std::function<double(Point x, MultiIndex d)>;

/// Spline as a field. Cells may belong to any refinement of the spline's
/// partition; each is mapped to the active cell that contains it.
Field spline_field(const SplineFunction& fn);
Field analytic_field(Analytic f);
Field difference(Field a, Field b);

inline double laplacian(const Field& f, const Cell& c, Point x) {
  return f(c, x, {2, 0}) + f(c, x, {0, 2});
}

}  // namespace afem
