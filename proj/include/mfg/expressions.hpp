#pragma once

#include "mfg/grid.hpp"

#include <stdexcept>
#include <string>

namespace mfg {

struct ExprError : std::runtime_error {
  std::size_t position;  // byte offset into the expression text
  ExprError(const std::string& what, std::size_t pos)
      : std::runtime_error(what), position(pos) {}
};

// Samples a closed-form expression on the grid. The grammar is the small
// whitelist the config format documents: numbers, + - * and parentheses,
// and cos/sin of 2*pi times an integer combination of the axis variables
// (x for 1D, or x1, x2, x3), e.g. "0.15 + 0.15*cos(2*pi*x)" or
// "0.3*sin(2*pi*(x1+2*x2))". Non-integer wavenumbers are rejected; they
// would not be periodic on the torus.
GridField evaluate_expression(const std::string& text, const PeriodicGrid& grid);

}  // namespace mfg
