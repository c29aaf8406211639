#pragma once

#include "emerge/artic.hpp"
#include "emerge/dataset.hpp"
#include "emerge/error.hpp"
#include "emerge/experiment.hpp"
#include "emerge/format.hpp"
#include "emerge/game.hpp"
#include "emerge/melody.hpp"
#include "emerge/metrics.hpp"
#include "emerge/oracle.hpp"
#include "emerge/perception.hpp"
#include "emerge/rng.hpp"
#include "emerge/stats.hpp"
