#ifndef TAUSFDE_TAUSFDE_HPP
#define TAUSFDE_TAUSFDE_HPP

#include "tausfde/errors.hpp"
#include "tausfde/grid.hpp"
#include "tausfde/fft.hpp"
#include "tausfde/coefficients.hpp"
#include "tausfde/transforms.hpp"
#include "tausfde/operator.hpp"
#include "tausfde/preconditioners.hpp"
#include "tausfde/krylov.hpp"
#include "tausfde/problems.hpp"
#include "tausfde/analysis.hpp"

#endif  // TAUSFDE_TAUSFDE_HPP
