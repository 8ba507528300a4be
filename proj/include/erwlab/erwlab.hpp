#pragma once

#include "branching.hpp"
#include "cookie_env.hpp"
#include "diffusion.hpp"
#include "experiments.hpp"
#include "marginal.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "walk.hpp"
