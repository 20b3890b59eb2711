#pragma once

#include "fraclab/arcs.hpp"
#include "fraclab/asymptotics.hpp"
#include "fraclab/counting.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/expsums.hpp"
#include "fraclab/forms.hpp"
#include "fraclab/integrate.hpp"
#include "fraclab/kernels.hpp"
#include "fraclab/quadrature.hpp"
