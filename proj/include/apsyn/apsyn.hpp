// Umbrella header.

#pragma once

#include "apsyn/cooccurrence.hpp"
#include "apsyn/corpus.hpp"
#include "apsyn/error.hpp"
#include "apsyn/eval.hpp"
#include "apsyn/measures.hpp"
#include "apsyn/model.hpp"
#include "apsyn/report.hpp"
#include "apsyn/vocabulary.hpp"
#include "apsyn/weighting.hpp"
