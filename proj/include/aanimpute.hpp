#pragma once

#include "aanimpute/config.hpp"
#include "aanimpute/data.hpp"
#include "aanimpute/errors.hpp"
#include "aanimpute/experiment.hpp"
#include "aanimpute/forest.hpp"
#include "aanimpute/metrics.hpp"
#include "aanimpute/network.hpp"
#include "aanimpute/objective.hpp"
#include "aanimpute/optimizers.hpp"
#include "aanimpute/parallel.hpp"
#include "aanimpute/rng.hpp"
#include "aanimpute/text.hpp"
#include "aanimpute/version.hpp"
