#pragma once

// Umbrella header: the whole library in one include.

#include "luauth/block.hpp"    // IWYU pragma: export
#include "luauth/errors.hpp"   // IWYU pragma: export
#include "luauth/field.hpp"    // IWYU pragma: export
#include "luauth/matrix.hpp"   // IWYU pragma: export
#include "luauth/protocol.hpp" // IWYU pragma: export
#include "luauth/sha256.hpp"   // IWYU pragma: export
#include "luauth/sim.hpp"      // IWYU pragma: export
#include "luauth/store.hpp"    // IWYU pragma: export
#include "luauth/wire.hpp"     // IWYU pragma: export
