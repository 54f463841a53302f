#pragma once

#include "mrec/error.hpp"
#include "mrec/linalg.hpp"
#include "mrec/rng.hpp"
#include "mrec/states.hpp"
#include "mrec/entropies.hpp"
#include "mrec/recovery.hpp"
#include "mrec/oneshot.hpp"
#include "mrec/typicality.hpp"
#include "mrec/definetti.hpp"
#include "mrec/squashed.hpp"
#include "mrec/report.hpp"
