#pragma once

#include "sztbss/error.hpp"
#include "sztbss/rng.hpp"
#include "sztbss/matrix.hpp"
#include "sztbss/signal.hpp"
#include "sztbss/io.hpp"
#include "sztbss/source_gen.hpp"
#include "sztbss/mixing.hpp"
#include "sztbss/szt.hpp"
#include "sztbss/givens.hpp"
#include "sztbss/symmetric_eigen.hpp"
#include "sztbss/jade.hpp"
#include "sztbss/pipeline.hpp"
