#pragma once

#include "funcdec/dag.hpp"
#include "funcdec/decomp.hpp"
#include "funcdec/dha.hpp"
#include "funcdec/error.hpp"
#include "funcdec/expr.hpp"
#include "funcdec/exprtree.hpp"
#include "funcdec/graphbuild.hpp"
#include "funcdec/hz.hpp"
#include "funcdec/interval.hpp"
#include "funcdec/lstm.hpp"
#include "funcdec/primitive.hpp"
