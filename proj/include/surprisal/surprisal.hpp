#pragma once

#include "surprisal/analytics.hpp"
#include "surprisal/corpus.hpp"
#include "surprisal/evaluation.hpp"
#include "surprisal/model.hpp"
#include "surprisal/rng.hpp"
#include "surprisal/synthgen.hpp"
#include "surprisal/training.hpp"
#include "surprisal/util.hpp"
