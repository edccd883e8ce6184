#pragma once

#include "slidegraph/apps.hpp"
#include "slidegraph/cache.hpp"
#include "slidegraph/costmodel.hpp"
#include "slidegraph/engine.hpp"
#include "slidegraph/metrics.hpp"
#include "slidegraph/preprocess.hpp"
#include "slidegraph/scheduler.hpp"
#include "slidegraph/storage.hpp"
