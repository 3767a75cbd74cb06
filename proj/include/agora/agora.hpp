// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 Agora Contributors

#pragma once

// Umbrella header for the agora text-analytics library: corpus
// ingestion, preprocessing, TF-IDF vectorization, NMF topic modeling,
// tags/neighbors, extractive summarization, persistence and serving.

#include "agora/bundle.hpp"
#include "agora/config.hpp"
#include "agora/corpus.hpp"
#include "agora/csv.hpp"
#include "agora/digest.hpp"
#include "agora/insights.hpp"
#include "agora/matrix_io.hpp"
#include "agora/nmf.hpp"
#include "agora/pipeline.hpp"
#include "agora/summarize.hpp"
#include "agora/svd.hpp"
#include "agora/textprep.hpp"
#include "agora/vectorize.hpp"
