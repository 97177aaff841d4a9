#pragma once

#include "tscope/applications.hpp"
#include "tscope/baselines.hpp"
#include "tscope/categories.hpp"
#include "tscope/cli.hpp"
#include "tscope/config.hpp"
#include "tscope/compare.hpp"
#include "tscope/corpus.hpp"
#include "tscope/embeddings.hpp"
#include "tscope/errors.hpp"
#include "tscope/evaluate.hpp"
#include "tscope/extraction.hpp"
#include "tscope/preprocess.hpp"
#include "tscope/random.hpp"
#include "tscope/stats.hpp"
#include "tscope/synthetic.hpp"
#include "tscope/tuples.hpp"
