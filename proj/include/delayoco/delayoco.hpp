#pragma once

#include "delayoco/core.hpp"
#include "delayoco/geometry.hpp"
#include "delayoco/solver.hpp"
#include "delayoco/losses.hpp"
#include "delayoco/rng.hpp"
#include "delayoco/delay.hpp"
#include "delayoco/learner.hpp"
#include "delayoco/oracle.hpp"
#include "delayoco/harness.hpp"
