#include "afem/field.hpp"

#include <memory>
#include <sstream>

namespace afem {

Field spline_field(const SplineFunction& fn) {
  struct Cache {
    SpaceHandle space;
    std::vector<TensorPoly> local;
  };
  auto cache = std::make_shared<Cache>();
  cache->space = fn.space_handle();
  const Partition& p = fn.space().partition();
  cache->local.reserve(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) cache->local.push_back(fn.local(k));
  return [cache](const Cell& c, Point x, MultiIndex d) {
    const Partition& part = cache->space->partition();
    auto k = part.covering(c);
    if (!k) {
      std::ostringstream msg;
      msg << "cell " << c << " is coarser than the spline's partition";
      throw std::invalid_argument(msg.str());
    }
    return eval_on_cell(cache->local[*k], part.cell(*k), x, d);
  };
}

Field analytic_field(Analytic f) {
  return [f = std::move(f)](const Cell&, Point x, MultiIndex d) { return f(x, d); };
}

Field difference(Field a, Field b) {
  return [a = std::move(a), b = std::move(b)](const Cell& c, Point x, MultiIndex d) {
    return a(c, x, d) - b(c, x, d);
  };
}

}  // namespace afem
