#pragma once

#include "strongpath/errors.hpp"
#include "strongpath/core_types.hpp"
#include "strongpath/quadrature.hpp"
#include "strongpath/special_functions.hpp"
#include "strongpath/sampling.hpp"
#include "strongpath/skeletons.hpp"
#include "strongpath/statistics.hpp"
#include "strongpath/transforms.hpp"
#include "strongpath/io.hpp"
