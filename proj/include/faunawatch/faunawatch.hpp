#pragma once

#include "faunawatch/analytics.hpp"
#include "faunawatch/domain.hpp"
#include "faunawatch/error.hpp"
#include "faunawatch/fetcher.hpp"
#include "faunawatch/gdelt.hpp"
#include "faunawatch/pipeline.hpp"
#include "faunawatch/record.hpp"
#include "faunawatch/relevance.hpp"
#include "faunawatch/sentiment.hpp"
#include "faunawatch/store.hpp"
#include "faunawatch/time.hpp"
#include "faunawatch/transport.hpp"
#include "faunawatch/url.hpp"
