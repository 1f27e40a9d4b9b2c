#ifndef HOUSEHT_HOUSEHT_HPP
#define HOUSEHT_HOUSEHT_HPP

#include "matrix.hpp"
#include "reflectors.hpp"
#include "factorizations.hpp"
#include "pencil_solve.hpp"
#include "report.hpp"
#include "ht_basic.hpp"
#include "ht_blocked.hpp"
#include "preprocess.hpp"
#include "givens.hpp"
#include "generators.hpp"
#include "verify.hpp"
#include "matrix_market.hpp"

#endif
