#pragma once

/// Umbrella header.

#include "erlb/bdm.hpp"          // IWYU pragma: export
#include "erlb/core.hpp"         // IWYU pragma: export
#include "erlb/datagen.hpp"      // IWYU pragma: export
#include "erlb/engine.hpp"       // IWYU pragma: export
#include "erlb/errors.hpp"       // IWYU pragma: export
#include "erlb/matching.hpp"     // IWYU pragma: export
#include "erlb/report.hpp"       // IWYU pragma: export
#include "erlb/strategy_basic.hpp"       // IWYU pragma: export
#include "erlb/strategy_blocksplit.hpp"  // IWYU pragma: export
#include "erlb/strategy_pairrange.hpp"   // IWYU pragma: export
