#pragma once

#include "towarx/calendar.hpp"
#include "towarx/config.hpp"
#include "towarx/error.hpp"
#include "towarx/evaluation.hpp"
#include "towarx/features.hpp"
#include "towarx/forecast.hpp"
#include "towarx/ingest.hpp"
#include "towarx/manifest.hpp"
#include "towarx/pipeline.hpp"
#include "towarx/preprocess.hpp"
#include "towarx/quantile.hpp"
#include "towarx/regression.hpp"
#include "towarx/report.hpp"
#include "towarx/selection.hpp"
#include "towarx/serialize.hpp"
#include "towarx/synthetic.hpp"
#include "towarx/text.hpp"
