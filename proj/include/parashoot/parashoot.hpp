#pragma once

// Umbrella header for the parashoot library.

#include "parashoot/artifacts.hpp"
#include "parashoot/bolza.hpp"
#include "parashoot/config.hpp"
#include "parashoot/entire.hpp"
#include "parashoot/error.hpp"
#include "parashoot/geometry.hpp"
#include "parashoot/homotopy.hpp"
#include "parashoot/integrate.hpp"
#include "parashoot/levi_civita.hpp"
#include "parashoot/minimize.hpp"
#include "parashoot/potential.hpp"
#include "parashoot/trajectory.hpp"
#include "parashoot/variational.hpp"
#include "parashoot/version.hpp"
