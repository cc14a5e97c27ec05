#pragma once

// Umbrella header: the whole simulator and its harness.

#include "ehpush/catalog.hpp"
#include "ehpush/energy.hpp"
#include "ehpush/engine.hpp"
#include "ehpush/errors.hpp"
#include "ehpush/io.hpp"
#include "ehpush/oracle.hpp"
#include "ehpush/policy.hpp"
#include "ehpush/request.hpp"
#include "ehpush/rng.hpp"
#include "ehpush/scenario.hpp"
#include "ehpush/stats.hpp"
#include "ehpush/sweep.hpp"
#include "ehpush/validation.hpp"
#include "ehpush/zipf.hpp"
