#ifndef OPL1_OPL1_HPP_
#define OPL1_OPL1_HPP_

#include "algebra.hpp"
#include "anorm.hpp"
#include "center.hpp"
#include "diagonal.hpp"
#include "error.hpp"
#include "functional.hpp"
#include "generate.hpp"
#include "harness.hpp"
#include "io.hpp"
#include "rng.hpp"

#endif
