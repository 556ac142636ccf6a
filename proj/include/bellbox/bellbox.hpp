#pragma once

// Umbrella header: no-signaling boxes amended with Bell-type joint
// measurements, their state-space geometry, correlation bounds, and the
// two-qubit reference simulator.

#include "bellbox/bell.hpp"
#include "bellbox/box.hpp"
#include "bellbox/correlations.hpp"
#include "bellbox/geometry.hpp"
#include "bellbox/json_io.hpp"
#include "bellbox/quantum.hpp"
#include "bellbox/rng.hpp"
#include "bellbox/simplex.hpp"
