#pragma once

#include "sea/config.hpp"
#include "sea/controller.hpp"
#include "sea/errors.hpp"
#include "sea/integrator.hpp"
#include "sea/io.hpp"
#include "sea/linkage.hpp"
#include "sea/lyapunov.hpp"
#include "sea/plant.hpp"
#include "sea/reference.hpp"
#include "sea/simulation.hpp"
#include "sea/validation.hpp"
