#pragma once

#include "hybridseq/common.hpp"
#include "hybridseq/corpus.hpp"
#include "hybridseq/crf.hpp"
#include "hybridseq/crowd.hpp"
#include "hybridseq/embeddings.hpp"
#include "hybridseq/evaluation.hpp"
#include "hybridseq/featurizer.hpp"
#include "hybridseq/lexicon.hpp"
#include "hybridseq/matrix.hpp"
#include "hybridseq/model.hpp"
#include "hybridseq/neural.hpp"
#include "hybridseq/rng.hpp"
#include "hybridseq/training.hpp"
