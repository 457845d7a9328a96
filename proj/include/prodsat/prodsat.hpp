#pragma once

#include "prodsat/error.hpp"
#include "prodsat/hypergraph.hpp"
#include "prodsat/mhs.hpp"
#include "prodsat/bezout.hpp"
#include "prodsat/qsat.hpp"
#include "prodsat/transfer.hpp"
#include "prodsat/univariate.hpp"
#include "prodsat/reductions.hpp"
#include "prodsat/sparse_poly.hpp"
#include "prodsat/poly_embed.hpp"
#include "prodsat/solver.hpp"
