#pragma once

#include "retok/alphabet.hpp"
#include "retok/analysis.hpp"
#include "retok/compression.hpp"
#include "retok/dag.hpp"
#include "retok/error.hpp"
#include "retok/grammar.hpp"
#include "retok/inference.hpp"
#include "retok/json_canonical.hpp"
#include "retok/memory.hpp"
#include "retok/model_io.hpp"
#include "retok/rng.hpp"
#include "retok/tokens.hpp"
