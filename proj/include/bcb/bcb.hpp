#ifndef BCB_BCB_HPP
#define BCB_BCB_HPP

#include "bcb/analysis.hpp"
#include "bcb/eigen.hpp"
#include "bcb/error.hpp"
#include "bcb/linalg.hpp"
#include "bcb/pwl_map.hpp"
#include "bcb/reduction.hpp"

#endif  // BCB_BCB_HPP
