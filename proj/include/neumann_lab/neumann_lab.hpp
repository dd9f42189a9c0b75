#pragma once

#include "analysis.hpp"
#include "birth_death.hpp"
#include "comb.hpp"
#include "convergence.hpp"
#include "errors.hpp"
#include "expression.hpp"
#include "graph.hpp"
#include "graph_io.hpp"
#include "mmatrix.hpp"
#include "models.hpp"
#include "operators.hpp"
#include "parallel.hpp"
#include "reports.hpp"
#include "semigroup.hpp"
